use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transforms::sphere::{funk_eigenvalue, gauss_legendre, real_harmonics};
use crate::unfolding::{OctantOrbit, Vec3};

/// Relative data energy tolerated outside the admissible harmonic classes.
pub const PARITY_TOLERANCE: f64 = 1e-8;

/// Real spherical harmonic coefficients `c_lm`, `l ≤ l_max`, packed at
/// index `l² + l + m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTable {
    pub l_max: usize,
    pub coefficients: Vec<f64>,
}

impl HarmonicTable {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            l_max,
            coefficients: vec![0.0; (l_max + 1) * (l_max + 1)],
        }
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            return 0.0;
        }
        self.coefficients[l * l + (l as i64 + m) as usize]
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        let y = real_harmonics(self.l_max, x);
        y.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunkOutcome {
    pub table: HarmonicTable,
    /// Squared norm of the odd-degree part of the data.
    pub odd_energy: f64,
    pub total_energy: f64,
}

/// Harmonic coefficients of the great-circle data, by Gauss–Legendre in
/// `cos θ` times the uniform rule in `φ`; exact up to degree `2·l_max + 2`.
fn project<D>(data: D, l_max: usize) -> Result<Vec<f64>>
where
    D: Fn(Vec3) -> Result<f64> + Sync,
{
    let (z, w) = gauss_legendre(l_max + 2);
    let nphi = 2 * l_max + 3;
    let nodes: Vec<(Vec3, f64)> = z
        .iter()
        .zip(&w)
        .flat_map(|(&zi, &wi)| {
            let st = (1.0 - zi * zi).sqrt();
            (0..nphi).map(move |j| {
                let phi = TAU * j as f64 / nphi as f64;
                ([st * phi.cos(), st * phi.sin(), zi], wi * TAU / nphi as f64)
            })
        })
        .collect();
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|(x, _)| data(*x))
        .collect::<Result<_>>()?;
    let n = (l_max + 1) * (l_max + 1);
    let mut d = vec![0.0; n];
    for ((x, wq), v) in nodes.iter().zip(&values) {
        let y = real_harmonics(l_max, *x);
        for (dk, yk) in d.iter_mut().zip(&y) {
            *dk += wq * v * yk;
        }
    }
    Ok(d)
}

fn divide_by_eigenvalues(d: &[f64], l_max: usize) -> HarmonicTable {
    let mut t = HarmonicTable::zeros(l_max);
    for l in (0..=l_max).step_by(2) {
        let lam = funk_eigenvalue(l);
        for k in l * l..(l + 1) * (l + 1) {
            t.coefficients[k] = d[k] / lam;
        }
    }
    t
}

fn energy(d: &[f64], keep: impl Fn(usize, i64) -> bool) -> (f64, f64) {
    let l_max = (d.len() as f64).sqrt() as usize - 1;
    let (mut out, mut total) = (0.0, 0.0);
    for l in 0..=l_max {
        for m in -(l as i64)..=l as i64 {
            let v = d[l * l + (l as i64 + m) as usize];
            total += v * v;
            if !keep(l, m) {
                out += v * v;
            }
        }
    }
    (out, total)
}

/// Inverts the Funk transform on even band-limited fields. `data(ω)` is the
/// integral over the great circle with unit normal `ω`.
pub fn funk_inversion<D>(data: D, l_max: usize) -> Result<FunkOutcome>
where
    D: Fn(Vec3) -> Result<f64> + Sync,
{
    let d = project(data, l_max)?;
    let (odd_energy, total_energy) = energy(&d, |l, _| l % 2 == 0);
    if odd_energy > PARITY_TOLERANCE * total_energy.max(f64::MIN_POSITIVE) && odd_energy > 1e-24 {
        return Err(Error::NonEvenData {
            violation: odd_energy,
            total: total_energy,
        });
    }
    Ok(FunkOutcome {
        table: divide_by_eigenvalues(&d, l_max),
        odd_energy,
        total_energy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctantReconstruction {
    pub table: HarmonicTable,
    /// Data energy outside the octant-invariant classes (`l` even, `m ≥ 0` even).
    pub violation_energy: f64,
    pub total_energy: f64,
}

impl OctantReconstruction {
    /// Reconstructed field at a point of the octant.
    pub fn eval(&self, x: Vec3) -> f64 {
        self.table.eval(x)
    }
}

/// Periodic broken ray data on the spherical octant, read as great-circle
/// data through the fold and inverted. Data that is not invariant under the
/// octant reflections cannot come from a folded field.
pub fn reconstruct_octant_periodic<D>(data: D, l_max: usize) -> Result<OctantReconstruction>
where
    D: Fn(&OctantOrbit) -> Result<f64> + Sync,
{
    let d = project(|w| data(&OctantOrbit::new(w)?), l_max)?;
    let (violation_energy, total_energy) = energy(&d, |l, m| l % 2 == 0 && m >= 0 && m % 2 == 0);
    if violation_energy > PARITY_TOLERANCE * total_energy.max(f64::MIN_POSITIVE)
        && violation_energy > 1e-24
    {
        return Err(Error::NonEvenData {
            violation: violation_energy,
            total: total_energy,
        });
    }
    Ok(OctantReconstruction {
        table: divide_by_eigenvalues(&d, l_max),
        violation_energy,
        total_energy,
    })
}
