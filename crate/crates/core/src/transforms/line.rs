use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{integrate_segment, Field2D, Quadrature, Weight};
use crate::geom::Line;
use crate::planar::BrokenRay;

/// Constant attenuation coefficient `h`; the weight at arclength `t` is
/// `exp(h·t)`. Decay by a coefficient `a > 0` is `h = −a`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AttenuationSpec {
    pub h: f64,
}

impl AttenuationSpec {
    pub fn none() -> Self {
        Self { h: 0.0 }
    }

    pub fn decay(a: f64) -> Self {
        Self { h: -a }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "attenuation must be finite, got {}",
                self.h
            )))
        }
    }

    fn weight(&self, offset: f64) -> Weight {
        if self.h == 0.0 {
            Weight::Unit
        } else {
            Weight::Exponential { h: self.h, offset }
        }
    }
}

/// `∫_γ f(γ(t))·exp(h·t) dt`, segment by segment with the arclength
/// travelled so far carried into each segment's weight.
pub fn brt_forward<F: Field2D + ?Sized>(
    f: &F,
    ray: &BrokenRay,
    att: AttenuationSpec,
    quad: &Quadrature,
) -> Result<f64> {
    att.validate()?;
    let mut offset = 0.0;
    let mut total = 0.0;
    for (a, b) in ray.segments() {
        total += integrate_segment(f, a, b, att.weight(offset), quad)?;
        offset += a.dist(b);
    }
    Ok(total)
}

/// Unit-weight integral over a closed orbit.
pub fn periodic_brt<F: Field2D + ?Sized>(
    f: &F,
    orbit: &BrokenRay,
    quad: &Quadrature,
) -> Result<f64> {
    if !orbit.is_closed() {
        return Err(Error::InvalidOrbit(
            "periodic transform needs a closed orbit".into(),
        ));
    }
    brt_forward(f, orbit, AttenuationSpec::none(), quad)
}

/// Integral of `f` along `line`, truncated to the support box of `f`.
pub fn radon_forward<F: Field2D + ?Sized>(f: &F, line: &Line, quad: &Quadrature) -> Result<f64> {
    let foot = line.foot();
    let d = line.direction();
    let Some((t0, t1)) = f.support().clip_line(foot, d) else {
        return Ok(0.0);
    };
    if t1 <= t0 {
        return Ok(0.0);
    }
    integrate_segment(f, foot + d * t0, foot + d * t1, Weight::Unit, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{AnalyticField, Expr};
    use crate::geom::{Rect, Vec2};
    use crate::planar::ConeDomain;

    fn unit() -> AnalyticField {
        AnalyticField::constant(1.0, Rect::centered(Vec2::ZERO, 4.0))
    }

    #[test]
    fn unit_field_over_example_ray_gives_length() {
        let c = ConeDomain::integer(1, 1.0).unwrap();
        let s3 = 3f64.sqrt();
        let ray = c
            .trace(Vec2::new(0.0, 1.0), Vec2::new(0.5, -s3 / 2.0), 4)
            .unwrap();
        let v = brt_forward(
            &unit(),
            &ray,
            AttenuationSpec::none(),
            &Quadrature::default(),
        )
        .unwrap();
        assert!((v - s3).abs() < 1e-12);
    }

    #[test]
    fn zero_field_gives_zero() {
        let z = AnalyticField::constant(0.0, Rect::centered(Vec2::ZERO, 4.0));
        let ray = BrokenRay::open(vec![
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 1.0),
        ]);
        assert_eq!(
            brt_forward(
                &z,
                &ray,
                AttenuationSpec::decay(0.3),
                &Quadrature::default()
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn attenuation_is_cumulative_across_reflections() {
        // same total length split at a reflection must match the straight ray
        let a = 0.9;
        let bent = BrokenRay::open(vec![
            Vec2::new(0.0, 1.0),
            Vec2::new(0.4, 0.0),
            Vec2::new(0.8, 1.0),
        ]);
        let l = bent.length();
        let v = brt_forward(
            &unit(),
            &bent,
            AttenuationSpec::decay(a),
            &Quadrature::default(),
        )
        .unwrap();
        let exact = (1.0 - (-a * l).exp()) / a;
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn disk_chords() {
        let rho = 0.6;
        let f = AnalyticField::new(
            Expr::Disk {
                center: Vec2::ZERO,
                radius: rho,
                amplitude: 1.0,
            },
            Rect::centered(Vec2::ZERO, 1.0),
        );
        for d in [0.0, 0.2, 0.59] {
            let v = radon_forward(&f, &Line::new(d, 0.7), &Quadrature::default()).unwrap();
            assert!(
                (v - 2.0 * (rho * rho - d * d).sqrt()).abs() < 1e-10,
                "{d}: {v}"
            );
        }
        assert_eq!(
            radon_forward(&f, &Line::new(0.7, 0.7), &Quadrature::default()).unwrap(),
            0.0
        );
        assert_eq!(
            radon_forward(&f, &Line::new(2.0, 0.7), &Quadrature::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn gaussian_matches_closed_form_projection() {
        // the projection of an isotropic gaussian is a 1-D gaussian in the offset
        let (c, s) = (Vec2::new(0.1, -0.2), 0.15);
        let f = AnalyticField::new(
            Expr::Gaussian {
                center: c,
                sigma: s,
                amplitude: 1.0,
            },
            Rect::centered(Vec2::ZERO, 3.0),
        );
        for (off, phi) in [(0.0, 0.3), (0.25, 1.9), (-0.4, 2.7)] {
            let line = Line::new(off, phi);
            let d = off - c.dot(line.normal());
            let exact = s * (2.0 * std::f64::consts::PI).sqrt() * (-d * d / (2.0 * s * s)).exp();
            let v = radon_forward(&f, &line, &Quadrature::default()).unwrap();
            assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
        }
    }
}
