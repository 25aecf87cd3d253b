use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::Field2D;
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Node density of the composite Simpson rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub nodes_per_unit: f64,
}

/// Bound on the change of a smooth segment integral when the default node
/// density is doubled, for fields no narrower than the default gaussian.
pub const REFINEMENT_TOLERANCE: f64 = 1e-6;

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            nodes_per_unit: 64.0,
        }
    }
}

impl Quadrature {
    pub fn new(nodes_per_unit: f64) -> Self {
        Self { nodes_per_unit }
    }

    /// Even number of Simpson intervals for a piece of length `len`, at least 2.
    pub fn intervals(&self, len: f64) -> usize {
        let n = ((len * self.nodes_per_unit).ceil() as usize).max(2);
        n + n % 2
    }

    pub fn refined(&self, factor: f64) -> Self {
        Self::new(self.nodes_per_unit * factor)
    }
}

/// Weight applied to the integrand at arclength `t` along a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Weight {
    Unit,
    /// `exp(h·(t + offset))`; `offset` is the arclength already travelled.
    Exponential {
        h: f64,
        offset: f64,
    },
}

impl Weight {
    fn at(&self, t: f64) -> f64 {
        match *self {
            Weight::Unit => 1.0,
            Weight::Exponential { h, offset } => (h * (t + offset)).exp(),
        }
    }
}

/// Composite Simpson rule with `n` (even) intervals on `[a, b]`.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n >= 2 && n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = f(a + h * i as f64);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b))
}

/// Trapezoid rule for a `period`-periodic integrand with `n` equispaced
/// nodes starting at `start`. Spectrally accurate for smooth periodic data.
pub fn trapezoid_periodic<F: FnMut(f64) -> f64>(
    mut f: F,
    start: f64,
    period: f64,
    n: usize,
) -> f64 {
    let h = period / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += f(start + h * i as f64);
    }
    acc * h
}

/// `∫₀ᴸ f(p0 + t·u)·w(t) dt` with `u` the unit direction from `p0` to `p1`.
///
/// The segment is split at the field's breakpoints and each piece gets its
/// own composite Simpson rule. The weight is evaluated at the exact nodes.
pub fn integrate_segment<F: Field2D + ?Sized>(
    field: &F,
    p0: Vec2,
    p1: Vec2,
    weight: Weight,
    quad: &Quadrature,
) -> Result<f64> {
    let len = p0.dist(p1);
    if len == 0.0 {
        return Ok(0.0);
    }
    let u = (p1 - p0) * (1.0 / len);
    let mut cuts = vec![0.0];
    field.breakpoints(p0, u, len, &mut cuts);
    cuts.push(len);
    cuts.sort_by(f64::total_cmp);
    let merge = 1e-12 * len.max(1.0);
    cuts.dedup_by(|b, a| *b - *a <= merge);
    if let Some(last) = cuts.last_mut() {
        *last = len;
    }

    let bad = Cell::new(None);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let n = quad.intervals(b - a);
        // piece ends are evaluated as one-sided limits so that jumps sitting
        // exactly on a breakpoint are resolved consistently
        let nudge = 1e-12 * len.max(1.0);
        let (lo, hi) = (a + nudge.min(0.25 * (b - a)), b - nudge.min(0.25 * (b - a)));
        total += simpson(
            |t| {
                let q = p0 + u * t.clamp(lo, hi);
                let v = field.eval(q);
                if !v.is_finite() && bad.get().is_none() {
                    bad.set(Some(q));
                }
                v * weight.at(t)
            },
            a,
            b,
            n,
        );
    }
    match bad.get() {
        Some(q) => Err(Error::Quadrature { x: q.x, y: q.y }),
        None => Ok(total),
    }
}
