use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Folds the unit sphere onto the closed octant `{xᵢ ≥ 0}`.
pub fn octant_fold_point(x: Vec3) -> Vec3 {
    [x[0].abs(), x[1].abs(), x[2].abs()]
}

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn normalize3(a: Vec3) -> Vec3 {
    let n = norm3(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Orthonormal basis `(e1, e2)` of the plane orthogonal to the unit vector
/// `omega`, chosen deterministically from the least aligned coordinate axis.
pub fn circle_basis(omega: Vec3) -> (Vec3, Vec3) {
    let i = (0..3)
        .min_by(|&a, &b| omega[a].abs().total_cmp(&omega[b].abs()))
        .unwrap();
    let mut axis = [0.0; 3];
    axis[i] = 1.0;
    let e1 = normalize3(cross3(axis, omega));
    let e2 = cross3(omega, e1);
    (e1, e2)
}

/// Closed billiard orbit in the spherical octant: the fold of the great
/// circle with unit normal `normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OctantOrbit {
    pub normal: Vec3,
}

impl OctantOrbit {
    pub fn new(normal: Vec3) -> Result<Self> {
        let n = norm3(normal);
        if !(n.is_finite() && n > 1e-12) {
            return Err(Error::InvalidOrbit(
                "great circle normal must be nonzero".into(),
            ));
        }
        Ok(Self {
            normal: normalize3(normal),
        })
    }

    /// Unit-speed point on the unfolded great circle.
    pub fn circle_point(&self, t: f64) -> Vec3 {
        let (e1, e2) = circle_basis(self.normal);
        let (s, c) = t.sin_cos();
        [
            c * e1[0] + s * e2[0],
            c * e1[1] + s * e2[1],
            c * e1[2] + s * e2[2],
        ]
    }

    /// Point of the folded orbit in the octant.
    pub fn point(&self, t: f64) -> Vec3 {
        octant_fold_point(self.circle_point(t))
    }

    pub fn length(&self) -> f64 {
        std::f64::consts::TAU
    }

    /// Parameters in `[0, 2π)` where the circle crosses a coordinate plane,
    /// i.e. where the folded orbit reflects.
    pub fn reflection_params(&self) -> Vec<f64> {
        let (e1, e2) = circle_basis(self.normal);
        let mut out = Vec::new();
        for i in 0..3 {
            // c·e1ᵢ + s·e2ᵢ = 0
            if e1[i].abs() < 1e-15 && e2[i].abs() < 1e-15 {
                continue;
            }
            let t0 = (-e1[i]).atan2(e2[i]).rem_euclid(std::f64::consts::TAU);
            out.push(t0);
            out.push((t0 + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU));
        }
        out.sort_by(f64::total_cmp);
        out
    }
}
