//! Spherical harmonics, Legendre functions and great circle integrals.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::trapezoid_periodic;
use crate::unfolding::{circle_basis, norm3, octant_fold_point, OctantOrbit, Vec3};

/// `P_l(x)` by the three-term recurrence.
pub fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for n in 1..l {
        let p2 = ((2 * n + 1) as f64 * x * p1 - n as f64 * p0) / (n + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Eigenvalue `2π P_l(0)` of the Funk transform on degree-`l` harmonics.
pub fn funk_eigenvalue(l: usize) -> f64 {
    TAU * legendre(l, 0.0)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let p = legendre(n, z);
            let pm = legendre(n - 1, z);
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let p = legendre(n, z);
        let pm = legendre(n - 1, z);
        dp = if dp == 0.0 {
            1.0
        } else {
            n as f64 * (z * p - pm) / (z * z - 1.0)
        };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Index of `(l, m)` in a packed harmonic table.
pub fn harmonic_index(l: usize, m: i64) -> usize {
    (l * l) + (l as i64 + m) as usize
}

/// Every real orthonormal spherical harmonic of degree ≤ `l_max` at the
/// unit vector `x`, packed by [`harmonic_index`].
///
/// `Y_l0 = P̄_l0(z)`, `Y_lm = √2 P̄_lm(z) cos(mφ)` and
/// `Y_l,−m = √2 P̄_lm(z) sin(mφ)` for `m > 0`, with `P̄` the associated
/// Legendre functions normalized on the sphere (no Condon–Shortley phase).
pub fn real_harmonics(l_max: usize, x: Vec3) -> Vec<f64> {
    let z = x[2].clamp(-1.0, 1.0);
    let st = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let phi = x[1].atan2(x[0]);
    let n = (l_max + 1) * (l_max + 1);
    let mut out = vec![0.0; n];
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st;
        }
        let (s, c) = (m as f64 * phi).sin_cos();
        let mut put = |l: usize, p: f64| {
            if m == 0 {
                out[l * l + l] = p;
            } else {
                out[l * l + l + m] = std::f64::consts::SQRT_2 * p * c;
                out[l * l + l - m] = std::f64::consts::SQRT_2 * p * s;
            }
        };
        put(m, pmm);
        if m == l_max {
            break;
        }
        let mut p_prev = pmm;
        let mut p = z * ((2 * m + 3) as f64).sqrt() * pmm;
        put(m + 1, p);
        for l in m + 2..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            let next = a * (z * p - b * p_prev);
            p_prev = p;
            p = next;
            put(l, p);
        }
    }
    out
}

/// Single real spherical harmonic.
pub fn real_harmonic(l: usize, m: i64, x: Vec3) -> f64 {
    real_harmonics(l, x)[l * l + (l as i64 + m) as usize]
}

/// One term `coefficient·Y_lm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub l: usize,
    pub m: i64,
    pub coefficient: f64,
}

/// Finite real spherical harmonic expansion.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SphereField {
    pub terms: Vec<HarmonicTerm>,
}

impl SphereField {
    pub fn new(terms: Vec<HarmonicTerm>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.m.unsigned_abs() as usize > t.l) {
            return Err(Error::InvalidParameter(format!(
                "|m| > l in term ({}, {})",
                t.l, t.m
            )));
        }
        Ok(Self { terms })
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.l).max().unwrap_or(0)
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        let n = norm3(x);
        let u = [x[0] / n, x[1] / n, x[2] / n];
        let y = real_harmonics(self.degree(), u);
        self.terms
            .iter()
            .map(|t| t.coefficient * y[t.l * t.l + (t.l as i64 + t.m) as usize])
            .sum()
    }
}

/// `∫₀^{2π} f(c(t)) dt` over the great circle with unit normal `omega`.
pub fn great_circle_integral<F: Fn(Vec3) -> f64>(f: F, omega: Vec3, nodes: usize) -> Result<f64> {
    let n = norm3(omega);
    if !(n.is_finite() && (n - 1.0).abs() < 1e-9) {
        return Err(Error::InvalidOrbit(format!(
            "circle normal must be a unit vector, |ω| = {n}"
        )));
    }
    let (e1, e2) = circle_basis(omega);
    let v = trapezoid_periodic(
        |t| {
            let (s, c) = t.sin_cos();
            f([
                c * e1[0] + s * e2[0],
                c * e1[1] + s * e2[1],
                c * e1[2] + s * e2[2],
            ])
        },
        0.0,
        TAU,
        nodes,
    );
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature {
            x: omega[0],
            y: omega[1],
        })
    }
}

/// Periodic broken ray transform of an octant field over a folded great circle.
pub fn periodic_brt_octant<F: Fn(Vec3) -> f64>(
    f: F,
    orbit: &OctantOrbit,
    nodes: usize,
) -> Result<f64> {
    great_circle_integral(|x| f(octant_fold_point(x)), orbit.normal, nodes)
}
