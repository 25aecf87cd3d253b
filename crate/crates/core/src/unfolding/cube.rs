use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::planar::BrokenRay;

/// Tolerance for coordinates sitting on a cube face.
pub const FACE_TOL: f64 = 1e-12;

/// Folds `ℝⁿ` onto `[0, 1]ⁿ`: `p(x)ᵢ = 1 − |1 − (xᵢ mod 2)|`.
pub fn cube_fold_point(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| cube_fold_coord(v)).collect()
}

pub fn cube_fold_coord(v: f64) -> f64 {
    1.0 - (1.0 - v.rem_euclid(2.0)).abs()
}

/// Closed billiard orbit in the unit cube: the fold of the torus geodesic
/// `t ↦ x0 + 2t·k`, `t ∈ [0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeOrbit {
    pub k: Vec<i64>,
    pub x0: Vec<f64>,
    /// Wall events in order; the first vertex is repeated at the end.
    pub vertices: Vec<Vec<f64>>,
    pub length: f64,
    pub reflections: usize,
}

impl CubeOrbit {
    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// Planar view of a two-dimensional orbit.
    pub fn to_broken_ray(&self) -> Result<BrokenRay> {
        if self.dim() != 2 {
            return Err(Error::InvalidParameter(format!(
                "orbit has dimension {}",
                self.dim()
            )));
        }
        let mut v: Vec<Vec2> = self
            .vertices
            .iter()
            .map(|p| Vec2::new(p[0], p[1]))
            .collect();
        v.pop();
        Ok(BrokenRay::closed(v))
    }

    /// Largest deviation from the reflection law over all vertices: the
    /// outgoing direction must equal the incoming one with the components
    /// normal to the walls hit flipped.
    pub fn reflection_residual(&self) -> f64 {
        let n = self.vertices.len() - 1;
        let dir = |a: &[f64], b: &[f64]| {
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
            let l = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            d.into_iter().map(|x| x / l).collect::<Vec<_>>()
        };
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let prev = if i == 0 { n - 1 } else { i - 1 };
            let din = dir(&self.vertices[prev], &self.vertices[i]);
            let dout = dir(&self.vertices[i], &self.vertices[i + 1]);
            let v = &self.vertices[i];
            for c in 0..self.dim() {
                let on_wall = v[c].abs() < 1e-9 || (v[c] - 1.0).abs() < 1e-9;
                let want = if on_wall { -din[c] } else { din[c] };
                worst = worst.max((dout[c] - want).abs());
            }
        }
        worst
    }
}

/// Folds the geodesic of direction `k ∈ ℤⁿ∖{0}` through `x0` into the cube.
/// The orbit starts at its first wall event.
pub fn torus_geodesic_to_cube_orbit(k: &[i64], x0: &[f64]) -> Result<CubeOrbit> {
    if k.len() != x0.len() || k.is_empty() {
        return Err(Error::InvalidOrbit(
            "k and x0 must have the same positive dimension".into(),
        ));
    }
    if k.iter().all(|&c| c == 0) {
        return Err(Error::InvalidOrbit("k must be nonzero".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidOrbit("x0 must be finite".into()));
    }
    for (&ki, &xi) in k.iter().zip(x0) {
        if ki == 0 && (xi - xi.round()).abs() < FACE_TOL {
            return Err(Error::DegenerateOrbit);
        }
    }

    // times in [0, 1) at which some coordinate crosses an integer
    let mut times = Vec::new();
    for (&ki, &xi) in k.iter().zip(x0) {
        if ki == 0 {
            continue;
        }
        let (a, b) = (xi, xi + 2.0 * ki as f64);
        let (lo, hi) = (a.min(b), a.max(b));
        let mut j = lo.ceil();
        while j <= hi {
            let t = (j - xi) / (2.0 * ki as f64);
            if (0.0..1.0).contains(&t) {
                times.push(t);
            }
            j += 1.0;
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|b, a| *b - *a < FACE_TOL);
    if times.len() > 1 && times[0] + 1.0 - times[times.len() - 1] < FACE_TOL {
        times.pop();
    }

    let point = |t: f64| -> Vec<f64> {
        k.iter()
            .zip(x0)
            .map(|(&ki, &xi)| {
                let v = cube_fold_coord(xi + 2.0 * t * ki as f64);
                if v < FACE_TOL {
                    0.0
                } else if v > 1.0 - FACE_TOL {
                    1.0
                } else {
                    v
                }
            })
            .collect()
    };
    let mut vertices: Vec<Vec<f64>> = times.iter().map(|&t| point(t)).collect();
    vertices.push(vertices[0].clone());
    let length = 2.0 * k.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
    Ok(CubeOrbit {
        k: k.to_vec(),
        x0: x0.to_vec(),
        reflections: times.len(),
        vertices,
        length,
    })
}
