use serde::{Deserialize, Serialize};

use super::Field2D;
use crate::geom::{Line, Rect, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    Cos,
    Sin,
}

/// Closed-form field expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expr", rename_all = "snake_case")]
pub enum Expr {
    Gaussian {
        center: Vec2,
        sigma: f64,
        amplitude: f64,
    },
    /// Indicator of a closed disk, scaled by `amplitude`.
    Disk {
        center: Vec2,
        radius: f64,
        amplitude: f64,
    },
    /// `(Σᵢ poly[i]·rⁱ)·trig(k·θ)` in polar coordinates about `center`.
    RadialTrig {
        center: Vec2,
        poly: Vec<f64>,
        k: u32,
        trig: Trig,
    },
    Sum {
        terms: Vec<Expr>,
    },
}

impl Expr {
    pub fn eval(&self, p: Vec2) -> f64 {
        match self {
            Expr::Gaussian {
                center,
                sigma,
                amplitude,
            } => {
                let d = p - *center;
                amplitude * (-d.dot(d) / (2.0 * sigma * sigma)).exp()
            }
            Expr::Disk {
                center,
                radius,
                amplitude,
            } => {
                if p.dist(*center) <= *radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            Expr::RadialTrig {
                center,
                poly,
                k,
                trig,
            } => {
                let d = p - *center;
                let r = d.norm();
                let radial = poly.iter().rev().fold(0.0, |acc, c| acc * r + c);
                if *k == 0 {
                    return match trig {
                        Trig::Cos => radial,
                        Trig::Sin => 0.0,
                    };
                }
                let theta = d.y.atan2(d.x) * *k as f64;
                radial
                    * match trig {
                        Trig::Cos => theta.cos(),
                        Trig::Sin => theta.sin(),
                    }
            }
            Expr::Sum { terms } => terms.iter().map(|t| t.eval(p)).sum(),
        }
    }

    fn breakpoints(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        match self {
            Expr::Disk { center, radius, .. } => {
                let line = Line::through(p - *center, u);
                if let Some((a, b)) = line.circle_crossings(*radius) {
                    let t0 = line.param_of(p - *center);
                    for t in [a - t0, b - t0] {
                        if t > 0.0 && t < len {
                            out.push(t);
                        }
                    }
                }
            }
            Expr::Sum { terms } => terms.iter().for_each(|t| t.breakpoints(p, u, len, out)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticField {
    pub expr: Expr,
    pub support: Rect,
}

impl AnalyticField {
    pub fn new(expr: Expr, support: Rect) -> Self {
        Self { expr, support }
    }

    pub fn constant(c: f64, support: Rect) -> Self {
        Self::new(
            Expr::RadialTrig {
                center: Vec2::ZERO,
                poly: vec![c],
                k: 0,
                trig: Trig::Cos,
            },
            support,
        )
    }
}

impl Field2D for AnalyticField {
    fn eval(&self, p: Vec2) -> f64 {
        if self.support.contains(p) {
            self.expr.eval(p)
        } else {
            0.0
        }
    }

    fn support(&self) -> Rect {
        self.support
    }

    fn breakpoints(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        self.support.crossings(p, u, len, out);
        self.expr.breakpoints(p, u, len, out);
    }
}
