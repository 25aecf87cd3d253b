use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::NullReport;
use crate::error::{Error, Result};
use crate::fields::{integrate_segment, Field2D, Quadrature, RadialProfile, Trig, Weight};
use crate::geom::{Rect, Vec2};
use crate::planar::{disk_star_orbit, gcd};

/// `f(r, θ) = g(r)·trig(kθ)` in polar coordinates about the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTrigField {
    pub profile: RadialProfile,
    pub k: u32,
    pub trig: Trig,
}

impl RadialTrigField {
    pub fn new(profile: RadialProfile, k: u32, trig: Trig) -> Self {
        Self { profile, k, trig }
    }

    /// `g(r)·cos θ`.
    pub fn cos_theta(profile: RadialProfile) -> Self {
        Self::new(profile, 1, Trig::Cos)
    }

    /// `g(r)`.
    pub fn radial(profile: RadialProfile) -> Self {
        Self::new(profile, 0, Trig::Cos)
    }
}

impl Field2D for RadialTrigField {
    fn eval(&self, p: Vec2) -> f64 {
        let r = p.norm();
        let g = self.profile.eval(r);
        if g == 0.0 || self.k == 0 {
            return match self.trig {
                Trig::Cos => g,
                Trig::Sin => 0.0,
            };
        }
        let a = self.k as f64 * p.y.atan2(p.x);
        g * match self.trig {
            Trig::Cos => a.cos(),
            Trig::Sin => a.sin(),
        }
    }

    fn support(&self) -> Rect {
        Rect::centered(Vec2::ZERO, self.profile.length)
    }

    fn breakpoints(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        self.support().crossings(p, u, len, out);
        // |p + t u| = R
        let r = self.profile.length;
        let b = p.dot(u);
        let disc = b * b - (p.dot(p) - r * r);
        if disc > 0.0 {
            for t in [-b - disc.sqrt(), -b + disc.sqrt()] {
                if t > 0.0 && t < len {
                    out.push(t);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitIntegral {
    pub q: u32,
    pub p: u32,
    pub phase: f64,
    pub length: f64,
    pub integral: f64,
}

impl OrbitIntegral {
    pub fn normalized(&self) -> f64 {
        self.integral.abs() / self.length
    }
}

/// Integrals of `f` over every star-polygon orbit `{q/p}` with
/// `2 ≤ q ≤ q_max`, `gcd(p, q) = 1`, `p ≤ q/2`, at phases
/// `2πj/(q·n_phases)`, `j < n_phases`.
pub fn disk_orbit_integrals<F: Field2D>(
    f: &F,
    q_max: u32,
    n_phases: usize,
    quad: &Quadrature,
) -> Result<Vec<OrbitIntegral>> {
    if q_max < 2 || n_phases == 0 {
        return Err(Error::InvalidParameter(format!(
            "need q_max ≥ 2 and phases ≥ 1, got {q_max}, {n_phases}"
        )));
    }
    let mut jobs = Vec::new();
    for q in 2..=q_max {
        for p in 1..=q / 2 {
            if gcd(p as u64, q as u64) != 1 {
                continue;
            }
            for j in 0..n_phases {
                jobs.push((q, p, TAU * j as f64 / (q as f64 * n_phases as f64)));
            }
        }
    }
    jobs.par_iter()
        .map(|&(q, p, phase)| {
            let orbit = disk_star_orbit(q, p, phase)?;
            let mut integral = 0.0;
            for (a, b) in orbit.segments() {
                integral += integrate_segment(f, a, b, Weight::Unit, quad)?;
            }
            Ok(OrbitIntegral {
                q,
                p,
                phase,
                length: orbit.length(),
                integral,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskNullOutcome {
    pub q_max: u32,
    pub phases: usize,
    pub orbits: usize,
    /// Largest `|integral| / orbit length`.
    pub max_normalized: f64,
    pub worst: OrbitIntegral,
}

impl DiskNullOutcome {
    fn from_integrals(q_max: u32, phases: usize, all: &[OrbitIntegral]) -> Self {
        let worst = *all
            .iter()
            .max_by(|a, b| a.normalized().total_cmp(&b.normalized()))
            .expect("nonempty");
        Self {
            q_max,
            phases,
            orbits: all.len(),
            max_normalized: worst.normalized(),
            worst,
        }
    }

    pub fn report(&self, tolerance: f64) -> NullReport {
        NullReport {
            check: "disk".into(),
            parameters: json!({ "q_max": self.q_max, "phases": self.phases, "orbits": self.orbits, "tolerance": tolerance }),
            max_residual: Some(self.max_normalized),
            sigma_min: None,
            pass: self.max_normalized < tolerance,
        }
    }
}

/// Periodic broken ray transform of `g(r)·cos θ` over all star orbits.
pub fn disk_null_check(
    g: &RadialProfile,
    q_max: u32,
    n_phases: usize,
    quad: &Quadrature,
) -> Result<DiskNullOutcome> {
    check_profile(g)?;
    let f = RadialTrigField::cos_theta(g.clone());
    let all = disk_orbit_integrals(&f, q_max, n_phases, quad)?;
    Ok(DiskNullOutcome::from_integrals(q_max, n_phases, &all))
}

/// The orbit on which `g(r)` itself has the largest integral.
pub fn disk_positivity_witness(
    g: &RadialProfile,
    q_max: u32,
    n_phases: usize,
    quad: &Quadrature,
) -> Result<OrbitIntegral> {
    check_profile(g)?;
    let f = RadialTrigField::radial(g.clone());
    let all = disk_orbit_integrals(&f, q_max, n_phases, quad)?;
    Ok(DiskNullOutcome::from_integrals(q_max, n_phases, &all).worst)
}

fn check_profile(g: &RadialProfile) -> Result<()> {
    if g.length > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "radial profile extends to r = {} > 1",
            g.length
        )));
    }
    Ok(())
}
