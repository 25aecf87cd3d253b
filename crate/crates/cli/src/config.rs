//! Scenario files: TOML with a closed schema.

use std::path::{Path, PathBuf};

use brt_core::fields::ProfileKind;
use brt_core::inversion::Basis;
use brt_core::phantoms::PhantomSpec;
use brt_core::planar::BoundaryRadius;
use brt_core::Vec2;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Trace,
    Forward,
    Sinogram,
    Reconstruct,
    PeriodicCube,
    Octant,
    NullCheck,
    AttProbe,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Trace => "trace",
            Task::Forward => "forward",
            Task::Sinogram => "sinogram",
            Task::Reconstruct => "reconstruct",
            Task::PeriodicCube => "periodic-cube",
            Task::Octant => "octant",
            Task::NullCheck => "null-check",
            Task::AttProbe => "att-probe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub geometry: Geometry,
    #[serde(default)]
    pub phantom: Option<PhantomSpec>,
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default)]
    pub inversion: Option<Inversion>,
    #[serde(default)]
    pub trace: Option<TraceConfig>,
    #[serde(default)]
    pub null: Option<NullConfig>,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Geometry {
    /// Opening angle `π/m` when `m` is given, otherwise `opening_angle`.
    Cone {
        #[serde(default)]
        m: Option<u32>,
        #[serde(default)]
        opening_angle: Option<f64>,
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        boundary: Option<BoundaryRadius>,
    },
    Tube {
        width: f64,
        length: f64,
    },
    Disk {},
    Cube {
        dim: usize,
    },
    Cylinder {
        length: f64,
    },
    Octant {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformConfig {
    /// Constant decay rate `a ≥ 0`.
    pub attenuation: f64,
    pub angles: usize,
    pub offsets: usize,
    /// Simpson nodes per unit length.
    pub quadrature: f64,
    /// Trapezoid nodes per closed geodesic.
    pub nodes: usize,
    /// Random lines for `forward`.
    pub lines: usize,
    pub band: Option<u32>,
    pub l_max: Option<usize>,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            attenuation: 0.0,
            angles: 360,
            offsets: 257,
            quadrature: 64.0,
            nodes: 256,
            lines: 200,
            band: None,
            l_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Inversion {
    Fbp {
        grid: usize,
        #[serde(default = "yes")]
        hann: bool,
    },
    Cgls {
        grid: usize,
        #[serde(default)]
        basis: Basis,
        #[serde(default)]
        tolerance: Option<f64>,
        #[serde(default)]
        max_iterations: Option<usize>,
        #[serde(default)]
        apex_margin: f64,
        #[serde(default)]
        shadow_margin: f64,
    },
    Fourier {
        #[serde(default = "default_points")]
        points: usize,
    },
    Funk {
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

fn yes() -> bool {
    true
}

fn default_points() -> usize {
    33
}

fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    #[serde(default)]
    pub start: Option<Vec2>,
    #[serde(default)]
    pub direction: Option<Vec2>,
    #[serde(default = "default_reflections")]
    pub max_reflections: usize,
    /// Star orbit `{q/p}` in the disk.
    #[serde(default)]
    pub q: Option<u32>,
    #[serde(default)]
    pub p: Option<u32>,
    #[serde(default)]
    pub phase: f64,
}

fn default_reflections() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullConfig {
    #[serde(default)]
    pub profile: Option<ProfileKind>,
    #[serde(default = "default_rays")]
    pub rays: usize,
    #[serde(default = "default_q_max")]
    pub q_max: u32,
    #[serde(default = "default_phases")]
    pub phases: usize,
    #[serde(default)]
    pub attenuation: f64,
    #[serde(default = "default_sixteen")]
    pub modes: usize,
    #[serde(default = "default_sixteen")]
    pub slopes: usize,
}

fn default_rays() -> usize {
    1000
}

fn default_q_max() -> u32 {
    64
}

fn default_phases() -> usize {
    32
}

fn default_sixteen() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub attenuation: f64,
    pub basis_size: usize,
    pub slopes: usize,
}

/// Declared acceptance thresholds; absent ones are not checked.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default)]
    pub rel_l2_error: Option<f64>,
    #[serde(default)]
    pub max_abs_error: Option<f64>,
    #[serde(default)]
    pub max_residual: Option<f64>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
