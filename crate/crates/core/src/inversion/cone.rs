use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fbp::{FbpOptions, FilteredSinogram};
use super::metrics::in_closed_cone;
use crate::error::{Error, Result};
use crate::fields::{GridField, GridSpec};
use crate::transforms::Sinogram;
use crate::unfolding::DihedralUnfolding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReconstruction {
    pub field: GridField,
    /// `maxᵢ ‖pullbackᵢ − mean‖ / ‖mean‖` over the cone nodes.
    pub sector_consistency: f64,
    pub interpolated_cells: usize,
}

/// FBP of the unfolded field followed by folding back: each cone node gets
/// the mean of the `K` sector pullbacks.
pub fn reconstruct_cone_integer(
    u: &DihedralUnfolding,
    sino: &Sinogram,
    grid: GridSpec,
    opts: FbpOptions,
) -> Result<ConeReconstruction> {
    if u.integer_m().is_none() {
        return Err(Error::InvalidParameter(
            "filtered backprojection needs an opening angle π/m".into(),
        ));
    }
    grid.validate()?;
    let mut sino = sino.clone();
    let interpolated_cells = sino.fill_excluded_by_interpolation();
    let filtered = FilteredSinogram::new(&sino, opts)?;
    let k = u.copies();
    let cone = u.cone();
    let pulls: Vec<Option<Vec<f64>>> = (0..grid.len())
        .into_par_iter()
        .map(|c| {
            let x = grid.node(c % grid.nx, c / grid.nx);
            in_closed_cone(cone, x).then(|| {
                (0..k)
                    .map(|i| filtered.backproject(u.section(i, x)))
                    .collect()
            })
        })
        .collect();

    let mut values = vec![0.0; grid.len()];
    let mut dev = vec![0.0; k];
    let mut norm = 0.0;
    for (c, p) in pulls.iter().enumerate() {
        let Some(p) = p else { continue };
        let mean = p.iter().sum::<f64>() / k as f64;
        values[c] = mean;
        norm += mean * mean;
        for (d, v) in dev.iter_mut().zip(p) {
            *d += (v - mean) * (v - mean);
        }
    }
    let worst = dev.iter().cloned().fold(0.0, f64::max);
    let sector_consistency = if norm > 0.0 {
        (worst / norm).sqrt()
    } else {
        worst.sqrt()
    };
    Ok(ConeReconstruction {
        field: GridField::new(grid, values)?,
        sector_consistency,
        interpolated_cells,
    })
}
