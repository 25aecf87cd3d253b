use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::trace::{trace, Billiard, Hit};
use super::BrokenRay;
use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};

/// Registry of outer boundary shapes `h(θ)`, `θ ∈ [0, α]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum BoundaryRadius {
    Constant {
        radius: f64,
    },
    /// `values[i]` on the angular interval between consecutive `breaks`.
    PiecewiseConstant {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// `base·(1 + amplitude·cos(frequency·θ))`.
    Perturbed {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl BoundaryRadius {
    pub fn constant(radius: f64) -> Self {
        BoundaryRadius::Constant { radius }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            BoundaryRadius::Constant { radius } => *radius,
            BoundaryRadius::PiecewiseConstant { breaks, values } => {
                let k = breaks.partition_point(|&b| b <= theta);
                values[k]
            }
            BoundaryRadius::Perturbed {
                base,
                amplitude,
                frequency,
            } => base * (1.0 + amplitude * (frequency * theta).cos()),
        }
    }

    /// Lower bound of `h`.
    pub fn min(&self) -> f64 {
        match self {
            BoundaryRadius::Constant { radius } => *radius,
            BoundaryRadius::PiecewiseConstant { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            BoundaryRadius::Perturbed {
                base, amplitude, ..
            } => base * (1.0 - amplitude.abs()),
        }
    }

    /// Upper bound of `h`.
    pub fn max(&self) -> f64 {
        match self {
            BoundaryRadius::Constant { radius } => *radius,
            BoundaryRadius::PiecewiseConstant { values, .. } => {
                values.iter().copied().fold(0.0, f64::max)
            }
            BoundaryRadius::Perturbed {
                base, amplitude, ..
            } => base * (1.0 + amplitude.abs()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, BoundaryRadius::Constant { .. })
    }

    fn validate(&self, alpha: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            BoundaryRadius::Constant { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                bad(format!("boundary radius must be positive, got {radius}"))
            }
            BoundaryRadius::PiecewiseConstant { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return bad("piecewise radius needs one more value than breaks".into());
                }
                if breaks.windows(2).any(|w| w[0] >= w[1])
                    || breaks.iter().any(|&b| !(b > 0.0 && b < alpha))
                {
                    return bad("radius breaks must increase strictly inside (0, α)".into());
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad("piecewise radius values must be positive".into());
                }
                Ok(())
            }
            BoundaryRadius::Perturbed {
                base,
                amplitude,
                frequency,
            } => {
                if !(*base > 0.0) || !(amplitude.abs() < 1.0) || !frequency.is_finite() {
                    return bad("perturbed radius needs base > 0 and |amplitude| < 1".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Planar sector `{(r, θ) : 0 < θ < α, 0 < r < h(θ)}`. The two edge rays
/// reflect, the outer curve is the measurement set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeDomain {
    pub opening_angle: f64,
    pub radius: BoundaryRadius,
}

impl ConeDomain {
    pub fn new(opening_angle: f64, radius: BoundaryRadius) -> Result<Self> {
        if !(opening_angle > 0.0 && opening_angle <= TAU + 1e-15) {
            return Err(Error::InvalidParameter(format!(
                "opening angle must lie in (0, 2π], got {opening_angle}"
            )));
        }
        radius.validate(opening_angle)?;
        Ok(Self {
            opening_angle: opening_angle.min(TAU),
            radius,
        })
    }

    /// Cone of opening angle `π/m` with constant radius.
    pub fn integer(m: u32, radius: f64) -> Result<Self> {
        Self::new(PI / m as f64, BoundaryRadius::constant(radius))
    }

    pub fn alpha(&self) -> f64 {
        self.opening_angle
    }

    /// `h` at a polar angle; angles outside `[0, α]` are clamped to the
    /// nearer edge.
    pub fn h(&self, theta: f64) -> f64 {
        self.radius.eval(self.clamp_angle(theta))
    }

    pub fn clamp_angle(&self, theta: f64) -> f64 {
        let a = self.opening_angle;
        if theta <= a {
            theta.max(0.0)
        } else if theta < a + (TAU - a) / 2.0 {
            a
        } else {
            0.0
        }
    }

    pub fn max_h(&self) -> f64 {
        self.radius.max()
    }

    pub fn min_h(&self) -> f64 {
        self.radius.min()
    }

    /// Tip tolerance `1e−9·min h`.
    pub fn eps_tip(&self) -> f64 {
        1e-9 * self.min_h()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let r = p.norm();
        if r == 0.0 {
            return false;
        }
        let th = p.angle();
        th < self.opening_angle && th > 0.0 && r < self.radius.eval(th)
    }

    pub fn edge_direction(&self) -> Vec2 {
        Vec2::from_polar(1.0, self.opening_angle)
    }

    /// Unit normal of the reflecting edge through `p` (either edge).
    pub fn edge_normal_at(&self, p: Vec2) -> Vec2 {
        let w = self.edge_direction();
        if p.y.abs() <= p.cross(w).abs() {
            Vec2::new(0.0, 1.0)
        } else {
            w.perp()
        }
    }

    /// Point of the measurement curve at polar angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> Vec2 {
        Vec2::from_polar(self.radius.eval(theta), theta)
    }

    pub fn bounding_box(&self) -> Rect {
        let a = self.opening_angle;
        let rmax = self.max_h();
        let mut pts = vec![
            Vec2::ZERO,
            Vec2::from_polar(rmax, 0.0),
            Vec2::from_polar(rmax, a),
        ];
        for k in 1..4 {
            let t = k as f64 * PI / 2.0;
            if t < a {
                pts.push(Vec2::from_polar(rmax, t));
            }
        }
        let mut r = Rect::new(pts[0], pts[0]);
        for p in &pts[1..] {
            r = r.union(&Rect::new(*p, *p));
        }
        r
    }

    /// Whether `p` lies on the closure of the measurement set (`r = h(θ)` or
    /// on a radial jump of a piecewise-constant radius).
    pub fn on_measurement_set(&self, p: Vec2, tol: f64) -> bool {
        let th = p.angle();
        let a = self.opening_angle;
        let ang_tol = tol / self.min_h();
        if th > a + ang_tol && th < TAU - ang_tol {
            return false;
        }
        let r = p.norm();
        let th = self.clamp_angle(th);
        if (r - self.radius.eval(th)).abs() <= tol {
            return true;
        }
        if let BoundaryRadius::PiecewiseConstant { breaks, values } = &self.radius {
            for (k, &b) in breaks.iter().enumerate() {
                let lo = values[k].min(values[k + 1]);
                let hi = values[k].max(values[k + 1]);
                if (th - b).abs() * r <= tol && r >= lo - tol && r <= hi + tol {
                    return true;
                }
            }
        }
        false
    }

    pub fn trace(&self, start: Vec2, dir: Vec2, max_reflections: usize) -> Result<BrokenRay> {
        trace(self, start, dir, max_reflections)
    }

    fn t_min(&self) -> f64 {
        1e-11 * self.max_h()
    }

    /// Exit parameter through the outer curve, searched on `(0, t_max]`.
    fn exit_param(&self, p: Vec2, d: Vec2, t_max: f64) -> Option<f64> {
        if let BoundaryRadius::Constant { radius } = self.radius {
            let b = p.dot(d);
            let c = p.dot(p) - radius * radius;
            let disc = b * b - c;
            if disc < 0.0 {
                return None;
            }
            let t = -b + disc.sqrt();
            return (t > self.t_min() && t <= t_max).then_some(t);
        }
        let resid = |t: f64| {
            let q = p + d * t;
            q.norm() - self.h(q.angle())
        };
        let step = self.min_h() / 512.0;
        let mut a = self.t_min().max(1e-9 * self.min_h());
        if resid(a) >= 0.0 {
            return None;
        }
        loop {
            let b = (a + step).min(t_max);
            if resid(b) >= 0.0 {
                return Some(bisect(resid, a, b));
            }
            if b >= t_max {
                return None;
            }
            a = b;
        }
    }
}

/// Bisection on a sign change `f(a) < 0 ≤ f(b)` down to `1e−13`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    while b - a > 1e-13 * b.abs().max(1.0) {
        let m = 0.5 * (a + b);
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    b
}

impl Billiard for ConeDomain {
    fn next_hit(&self, p: Vec2, d: Vec2) -> Result<Hit> {
        let tmin = self.t_min();
        let mut best: Option<(f64, Vec2, Vec2)> = None;
        let mut consider = |t: f64, point: Vec2, normal: Vec2| {
            if t > tmin && best.map_or(true, |(bt, _, _)| t < bt) {
                best = Some((t, point, normal));
            }
        };
        // edge θ = 0
        if d.y != 0.0 {
            let t = -p.y / d.y;
            let x = p.x + t * d.x;
            if x > 0.0 {
                consider(t, Vec2::new(x, 0.0), Vec2::new(0.0, 1.0));
            }
        }
        // edge θ = α
        let w = self.edge_direction();
        let dw = d.cross(w);
        if dw != 0.0 {
            let t = -p.cross(w) / dw;
            let q = p + d * t;
            let r = q.dot(w);
            if r > 0.0 {
                consider(t, w * r, w.perp());
            }
        }
        let t_edge = best.map_or(4.0 * self.max_h(), |b| b.0);
        match self.exit_param(p, d, t_edge) {
            Some(t) if best.map_or(true, |b| t <= b.0) => Ok(Hit::Exit {
                t,
                point: p + d * t,
            }),
            _ => match best {
                Some((t, point, normal)) => Ok(Hit::Reflect { t, point, normal }),
                None => Err(Error::InvalidStart(
                    "ray leaves the cone without an event".into(),
                )),
            },
        }
    }

    fn corners(&self) -> Vec<Vec2> {
        vec![
            Vec2::ZERO,
            self.boundary_point(0.0),
            self.boundary_point(self.opening_angle),
        ]
    }

    fn tip_tolerance(&self) -> f64 {
        self.eps_tip()
    }

    fn validate_start(&self, start: Vec2, dir: Vec2) -> Result<()> {
        let tol = 1e-9 * self.max_h().max(1.0);
        if !self.on_measurement_set(start, tol) {
            return Err(Error::InvalidStart(format!(
                "({}, {}) is not on the measurement curve",
                start.x, start.y
            )));
        }
        let probe = start + dir * (1e-7 * self.min_h());
        if !self.contains(probe) {
            return Err(Error::InvalidStart(
                "direction does not point into the cone".into(),
            ));
        }
        Ok(())
    }
}
