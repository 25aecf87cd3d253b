use serde::{Deserialize, Serialize};

use super::trace::{trace, Billiard, Hit, TANGENT_TOL};
use super::BrokenRay;
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Rectangle `[0, W] × [0, L]` whose vertical sides reflect; rays run from
/// the bottom side to the top side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectTube {
    pub width: f64,
    pub length: f64,
}

impl RectTube {
    pub fn new(width: f64, length: f64) -> Result<Self> {
        if !(width > 0.0 && length > 0.0 && width.is_finite() && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tube needs W, L > 0, got {width} × {length}"
            )));
        }
        Ok(Self { width, length })
    }

    pub fn trace(&self, start: Vec2, dir: Vec2, max_reflections: usize) -> Result<BrokenRay> {
        trace(self, start, dir, max_reflections)
    }
}

impl Billiard for RectTube {
    fn next_hit(&self, p: Vec2, d: Vec2) -> Result<Hit> {
        let tx = if d.x > 0.0 {
            (self.width - p.x) / d.x
        } else if d.x < 0.0 {
            -p.x / d.x
        } else {
            f64::INFINITY
        };
        let ty = if d.y > 0.0 {
            (self.length - p.y) / d.y
        } else if d.y < 0.0 {
            -p.y / d.y
        } else {
            f64::INFINITY
        };
        if ty <= tx {
            let y = if d.y > 0.0 { self.length } else { 0.0 };
            return Ok(Hit::Exit {
                t: ty,
                point: Vec2::new(p.x + ty * d.x, y),
            });
        }
        let (x, n) = if d.x > 0.0 {
            (self.width, Vec2::new(-1.0, 0.0))
        } else {
            (0.0, Vec2::new(1.0, 0.0))
        };
        Ok(Hit::Reflect {
            t: tx,
            point: Vec2::new(x, p.y + tx * d.y),
            normal: n,
        })
    }

    fn corners(&self) -> Vec<Vec2> {
        vec![
            Vec2::ZERO,
            Vec2::new(self.width, 0.0),
            Vec2::new(0.0, self.length),
            Vec2::new(self.width, self.length),
        ]
    }

    fn tip_tolerance(&self) -> f64 {
        1e-9 * self.width.min(self.length)
    }

    fn validate_start(&self, start: Vec2, dir: Vec2) -> Result<()> {
        let tol = 1e-9 * self.width.max(self.length);
        if start.y.abs() > tol || start.x < 0.0 || start.x > self.width {
            return Err(Error::InvalidStart(format!(
                "({}, {}) is not on the bottom side",
                start.x, start.y
            )));
        }
        if dir.y.abs() < TANGENT_TOL {
            return Err(Error::TangentialHit(dir.y.abs()));
        }
        if dir.y < 0.0 {
            return Err(Error::InvalidStart(
                "direction points out of the tube".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axial_ray_goes_straight_up() {
        let t = RectTube::new(2.0, 3.0).unwrap();
        let r = t
            .trace(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), 8)
            .unwrap();
        assert_eq!(r.reflections(), 0);
        assert_eq!(r.end(), Vec2::new(1.0, 3.0));
    }

    #[test]
    fn diagonal_ray_keeps_axial_velocity() {
        // event-by-event oracle: from (0.1, 0) at 45°, walls hit at y = 0.9 (x = 1)
        // and the top is reached at x = 1 − 0.1 = 0.9
        let t = RectTube::new(1.0, 1.0).unwrap();
        let d = Vec2::new(1.0, 1.0).normalized();
        let r = t.trace(Vec2::new(0.1, 0.0), d, 8).unwrap();
        assert_eq!(r.reflections(), 1);
        assert!(r.vertices()[1].dist(Vec2::new(1.0, 0.9)) < 1e-15);
        assert!(r.end().dist(Vec2::new(0.9, 1.0)) < 1e-15);
        for (a, b) in r.segments() {
            let v = (b - a).normalized();
            assert!((v.y - d.y).abs() < 1e-12);
        }
    }

    #[test]
    fn horizontal_ray_never_reaches_the_top() {
        let t = RectTube::new(1.0, 1.0).unwrap();
        assert!(matches!(
            t.trace(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), 50),
            Err(Error::TangentialHit(_))
        ));
        let shallow = Vec2::new(1.0, 1e-3).normalized();
        assert!(matches!(
            t.trace(Vec2::new(0.5, 0.0), shallow, 50),
            Err(Error::MaxReflectionsExceeded(50))
        ));
    }
}
