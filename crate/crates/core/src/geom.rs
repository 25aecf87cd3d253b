//! Planar points, boxes and lines in normal form.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counter-clockwise rotation by 90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            let w = a + std::f64::consts::TAU;
            // a tiny negative angle rounds to exactly 2π
            if w >= std::f64::consts::TAU {
                0.0
            } else {
                w
            }
        } else {
            a
        }
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Distance from `q` to the closed segment `[a, b]`.
pub fn point_segment_distance(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return q.dist(a);
    }
    let t = ((q - a).dot(ab) / len2).clamp(0.0, 1.0);
    q.dist(a + ab * t)
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn centered(center: Vec2, half_width: f64) -> Self {
        let h = Vec2::new(half_width, half_width);
        Self::new(center - h, center + h)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(
            Vec2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            Vec2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        )
    }

    /// Parameter interval `[t0, t1]` of `p + t·d` inside the box (slab method),
    /// or `None` when the line misses it.
    pub fn clip_line(&self, p: Vec2, d: Vec2) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for (o, dir, lo, hi) in [
            (p.x, d.x, self.min.x, self.max.x),
            (p.y, d.y, self.min.y, self.max.y),
        ] {
            if dir == 0.0 {
                if o < lo || o > hi {
                    return None;
                }
            } else {
                let a = (lo - o) / dir;
                let b = (hi - o) / dir;
                t0 = t0.max(a.min(b));
                t1 = t1.min(a.max(b));
            }
        }
        (t1 > t0).then_some((t0, t1))
    }

    /// Crossing parameters of the box boundary strictly inside `(0, len)` along
    /// `p + t·u`.
    pub fn crossings(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        if let Some((a, b)) = self.clip_line(p, u) {
            for t in [a, b] {
                if t > 0.0 && t < len {
                    out.push(t);
                }
            }
        }
    }
}

/// Line `{x : x·(cos φ, sin φ) = s}`, traversed in direction `(−sin φ, cos φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub offset: f64,
    pub angle: f64,
}

impl Line {
    pub fn new(offset: f64, angle: f64) -> Self {
        Self { offset, angle }
    }

    /// The line through `p` travelling along unit direction `d`.
    pub fn through(p: Vec2, d: Vec2) -> Self {
        let n = Vec2::new(d.y, -d.x);
        Self::new(p.dot(n), n.y.atan2(n.x))
    }

    pub fn normal(&self) -> Vec2 {
        Vec2::from_polar(1.0, self.angle)
    }

    pub fn direction(&self) -> Vec2 {
        let (s, c) = self.angle.sin_cos();
        Vec2::new(-s, c)
    }

    /// Foot of the perpendicular from the origin.
    pub fn foot(&self) -> Vec2 {
        self.normal() * self.offset
    }

    pub fn point_at(&self, t: f64) -> Vec2 {
        self.foot() + self.direction() * t
    }

    /// Parameter of the orthogonal projection of `p` onto the line.
    pub fn param_of(&self, p: Vec2) -> f64 {
        (p - self.foot()).dot(self.direction())
    }

    /// Parameter where the line crosses the ray `{r·(cos β, sin β) : r > 0}`.
    pub fn ray_crossing(&self, beta: f64) -> Option<f64> {
        let w = Vec2::from_polar(1.0, beta);
        let d = self.direction();
        let denom = d.cross(w);
        if denom.abs() < 1e-300 {
            return None;
        }
        // foot + t d = r w  →  cross both sides with w
        let t = -self.foot().cross(w) / denom;
        let r = self.point_at(t).dot(w);
        (r > 0.0).then_some(t)
    }

    /// Parameters where the line meets the circle of radius `r` about the origin.
    pub fn circle_crossings(&self, r: f64) -> Option<(f64, f64)> {
        let s = self.offset.abs();
        if s >= r {
            return None;
        }
        let half = (r * r - s * s).sqrt();
        Some((-half, half))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_is_in_range() {
        assert_eq!(Vec2::new(1.0, 0.0).angle(), 0.0);
        assert!((Vec2::new(0.0, -1.0).angle() - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!(Vec2::new(1.0, -1e-300).angle() < std::f64::consts::TAU);
    }

    #[test]
    fn line_through_recovers_point_and_direction() {
        let p = Vec2::new(0.3, -0.7);
        let d = Vec2::new(0.6, 0.8);
        let l = Line::through(p, d);
        assert!(l.direction().dist(d) < 1e-15);
        assert!(l.point_at(l.param_of(p)).dist(p) < 1e-15);
    }

    #[test]
    fn ray_crossing_on_positive_axis_only() {
        let l = Line::through(Vec2::new(0.5, -1.0), Vec2::new(0.0, 1.0));
        let t = l.ray_crossing(0.0).unwrap();
        assert!(l.point_at(t).dist(Vec2::new(0.5, 0.0)) < 1e-15);
        assert!(l.ray_crossing(std::f64::consts::PI).is_none());
    }

    #[test]
    fn clip_line_slab() {
        let r = Rect::centered(Vec2::ZERO, 1.0);
        let (a, b) = r
            .clip_line(Vec2::new(-5.0, 0.5), Vec2::new(1.0, 0.0))
            .unwrap();
        assert!((a - 4.0).abs() < 1e-15 && (b - 6.0).abs() < 1e-15);
        assert!(r
            .clip_line(Vec2::new(-5.0, 2.0), Vec2::new(1.0, 0.0))
            .is_none());
    }
}
