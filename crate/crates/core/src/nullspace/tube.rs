use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{NullReport, ZERO_MEAN_TOLERANCE};
use crate::error::{Error, Result};
use crate::fields::{integrate_segment, Field2D, Quadrature, RadialProfile, Weight};
use crate::geom::{Rect, Vec2};
use crate::planar::RectTube;

/// Default quadrature for tube rays. Segment ends fall anywhere inside a
/// period of `g`, so nothing cancels and the rule itself must be accurate.
pub const TUBE_QUADRATURE: Quadrature = Quadrature {
    nodes_per_unit: 1024.0,
};

/// Largest angle between a sampled ray and the tube axis.
const MAX_TILT: f64 = 1.2;

/// `f(x, t) = g(t)` on the tube, zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeField {
    pub tube: RectTube,
    pub profile: RadialProfile,
}

impl Field2D for TubeField {
    fn eval(&self, p: Vec2) -> f64 {
        if p.x < 0.0 || p.x > self.tube.width {
            return 0.0;
        }
        self.profile.eval(p.y)
    }

    fn support(&self) -> Rect {
        Rect::new(Vec2::ZERO, Vec2::new(self.tube.width, self.tube.length))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeRaySample {
    pub start: Vec2,
    pub direction: Vec2,
    pub reflections: usize,
    pub integral: f64,
    /// `(1/v_axial)·∫g`.
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeNullOutcome {
    pub width: f64,
    pub length: f64,
    pub seed: u64,
    pub profile_integral: f64,
    pub samples: Vec<TubeRaySample>,
}

impl TubeNullOutcome {
    pub fn max_abs_integral(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.integral.abs())
            .fold(0.0, f64::max)
    }

    /// Largest gap between the traced integral and its closed form.
    pub fn max_closed_form_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.integral - s.closed_form).abs())
            .fold(0.0, f64::max)
    }

    /// The ray with the largest `|integral|`.
    pub fn witness(&self) -> Option<&TubeRaySample> {
        self.samples
            .iter()
            .max_by(|a, b| a.integral.abs().total_cmp(&b.integral.abs()))
    }

    pub fn report(&self, tolerance: f64) -> NullReport {
        let r = self.max_abs_integral();
        NullReport {
            check: "tube".into(),
            parameters: json!({
                "width": self.width,
                "length": self.length,
                "rays": self.samples.len(),
                "seed": self.seed,
                "tolerance": tolerance,
            }),
            max_residual: Some(r),
            sigma_min: None,
            pass: r < tolerance,
        }
    }
}

/// Integrates `f(x, t) = g(t)` over `n_rays` seeded random broken rays from
/// the bottom of the tube to the top. No condition on `g`.
pub fn tube_ray_integrals(
    tube: &RectTube,
    g: &RadialProfile,
    n_rays: usize,
    seed: u64,
    quad: &Quadrature,
) -> Result<TubeNullOutcome> {
    if (g.length - tube.length).abs() > 1e-12 * tube.length {
        return Err(Error::InvalidParameter(format!(
            "profile length {} differs from tube length {}",
            g.length, tube.length
        )));
    }
    let field = TubeField {
        tube: *tube,
        profile: g.clone(),
    };
    let profile_integral = g.integral(quad);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rays = Vec::with_capacity(n_rays);
    while rays.len() < n_rays {
        let x = rng.gen_range(0.0..tube.width);
        let tilt: f64 = rng.gen_range(-MAX_TILT..MAX_TILT);
        let dir = Vec2::from_polar(1.0, FRAC_PI_2 - tilt);
        let bound = (tube.length * tilt.tan().abs() / tube.width).ceil() as usize + 2;
        match tube.trace(Vec2::new(x, 0.0), dir, bound) {
            Ok(r) => rays.push((dir, r)),
            Err(Error::TipHit { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let samples = rays
        .par_iter()
        .map(|(dir, ray)| {
            let mut integral = 0.0;
            for (a, b) in ray.segments() {
                integral += integrate_segment(&field, a, b, Weight::Unit, quad)?;
            }
            Ok(TubeRaySample {
                start: ray.start(),
                direction: *dir,
                reflections: ray.reflections(),
                integral,
                closed_form: profile_integral / dir.y,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TubeNullOutcome {
        width: tube.width,
        length: tube.length,
        seed,
        profile_integral,
        samples,
    })
}

/// As [`tube_ray_integrals`], after checking that `∫g = 0`.
pub fn tube_null_check(
    tube: &RectTube,
    g: &RadialProfile,
    n_rays: usize,
    seed: u64,
    quad: &Quadrature,
) -> Result<TubeNullOutcome> {
    let mean = g.integral(quad);
    if mean.abs() > ZERO_MEAN_TOLERANCE {
        return Err(Error::InvalidNullProfile(mean));
    }
    tube_ray_integrals(tube, g, n_rays, seed, quad)
}
