//! Explicit null functions of broken ray transforms and the attenuated
//! cylinder transform that has none.

mod cylinder;
mod disk;
mod tube;

pub use cylinder::{
    cylinder_att_forward, cylinder_identity_check, cylinder_injectivity_probe, cylinder_mode,
    laplace, CylinderGeodesic, CylinderIdentityOutcome, InjectivityProbe,
};
pub use disk::{
    disk_null_check, disk_orbit_integrals, disk_positivity_witness, DiskNullOutcome, OrbitIntegral,
    RadialTrigField,
};
pub use tube::{
    tube_null_check, tube_ray_integrals, TubeField, TubeNullOutcome, TubeRaySample, TUBE_QUADRATURE,
};

use serde::{Deserialize, Serialize};

/// Tolerance on `|∫g|` for a profile to count as zero-mean.
pub const ZERO_MEAN_TOLERANCE: f64 = 1e-10;

/// Summary emitted by every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullReport {
    pub check: String,
    pub parameters: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_min: Option<f64>,
    pub pass: bool,
}

impl NullReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
