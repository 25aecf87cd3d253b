use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridField, GridSpec};
use crate::geom::Vec2;
use crate::transforms::{CellMask, Sinogram, SinogramGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbpOptions {
    /// Hann window on the ramp filter.
    pub hann: bool,
}

impl Default for FbpOptions {
    fn default() -> Self {
        Self { hann: true }
    }
}

/// Ramp-filtered projections, ready for backprojection.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSinogram {
    geometry: SinogramGeometry,
    rows: Vec<f64>,
    normals: Vec<Vec2>,
}

/// Spatial ramp kernel sampled at spacing `ds`, laid out circularly.
fn ramp_kernel(p: usize, ds: f64) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); p];
    h[0].re = 1.0 / (4.0 * ds * ds);
    for n in 1..p / 2 {
        if n % 2 == 1 {
            let v = -1.0 / ((n * n) as f64 * PI * PI * ds * ds);
            h[n].re = v;
            h[p - n].re = v;
        }
    }
    h
}

impl FilteredSinogram {
    pub fn new(sino: &Sinogram, opts: FbpOptions) -> Result<Self> {
        let excluded = sino.count(CellMask::Excluded);
        if excluded > 0 {
            return Err(Error::IncompleteSinogram(excluded));
        }
        let g = sino.geometry;
        let n = g.n_offsets;
        let p = (2 * n).next_power_of_two();
        let ds = g.ds();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(p);
        let inv = planner.plan_fft_inverse(p);

        let mut kernel = ramp_kernel(p, ds);
        fwd.process(&mut kernel);
        let response: Vec<f64> = (0..p)
            .map(|k| {
                let f = k.min(p - k) as f64 / p as f64;
                let w = if opts.hann {
                    0.5 * (1.0 + (2.0 * PI * f).cos())
                } else {
                    1.0
                };
                kernel[k].re * w
            })
            .collect();

        let rows: Vec<Vec<f64>> = (0..g.n_angles)
            .into_par_iter()
            .map(|i| {
                let mut buf = vec![Complex64::new(0.0, 0.0); p];
                for j in 0..n {
                    buf[j].re = sino.value(i, j);
                }
                fwd.process(&mut buf);
                for (b, r) in buf.iter_mut().zip(&response) {
                    *b *= *r;
                }
                inv.process(&mut buf);
                let scale = ds / p as f64;
                buf[..n].iter().map(|c| c.re * scale).collect()
            })
            .collect();
        let normals = (0..g.n_angles)
            .map(|i| Vec2::from_polar(1.0, g.angle(i)))
            .collect();
        Ok(Self {
            geometry: g,
            rows: rows.concat(),
            normals,
        })
    }

    /// Backprojection at one point, with linear interpolation in the offset.
    pub fn backproject(&self, x: Vec2) -> f64 {
        let g = &self.geometry;
        let n = g.n_offsets;
        let ds = g.ds();
        let mut acc = 0.0;
        for (i, nrm) in self.normals.iter().enumerate() {
            let u = (x.dot(*nrm) + g.s_max) / ds;
            if u < 0.0 || u > (n - 1) as f64 {
                continue;
            }
            let j = (u.floor() as usize).min(n - 2);
            let t = u - j as f64;
            let row = &self.rows[i * n..(i + 1) * n];
            acc += (1.0 - t) * row[j] + t * row[j + 1];
        }
        acc * PI / g.n_angles as f64
    }
}

/// Filtered backprojection onto the nodes of `grid`.
pub fn fbp_reconstruct(sino: &Sinogram, grid: GridSpec, opts: FbpOptions) -> Result<GridField> {
    grid.validate()?;
    let filtered = FilteredSinogram::new(sino, opts)?;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|c| filtered.backproject(grid.node(c % grid.nx, c / grid.nx)))
        .collect();
    GridField::new(grid, values)
}
