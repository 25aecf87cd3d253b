use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{simpson, Quadrature};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `amplitude·exp(1 − 1/(1 − u²))` for `|u| < 1`, `u = (t − center)/half_width`.
    Bump {
        center: f64,
        half_width: f64,
        amplitude: f64,
    },
    /// `amplitude·sin(2π·mode·t/length)`.
    Sine {
        mode: u32,
        amplitude: f64,
    },
    /// `amplitude·cos(2π·mode·t/length)`.
    Cosine {
        mode: u32,
        amplitude: f64,
    },
    /// `amplitude·exp(−rate·t)` on the profile interval.
    TruncatedExp {
        rate: f64,
        amplitude: f64,
    },
    Constant {
        value: f64,
    },
    /// Uniform samples over `[0, length]`, linearly interpolated.
    Samples {
        values: Vec<f64>,
    },
    Sum {
        terms: Vec<ProfileKind>,
    },
}

/// A real function `g` on `[0, length]`, extended by zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub length: f64,
}

impl RadialProfile {
    pub fn new(kind: ProfileKind, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "profile length must be positive, got {length}"
            )));
        }
        let p = Self { kind, length };
        p.validate_kind(&p.kind)?;
        Ok(p)
    }

    /// Profile on the unit interval.
    pub fn unit(kind: ProfileKind) -> Result<Self> {
        Self::new(kind, 1.0)
    }

    fn validate_kind(&self, k: &ProfileKind) -> Result<()> {
        match k {
            ProfileKind::Bump { half_width, .. } if !(*half_width > 0.0) => Err(
                Error::InvalidParameter("bump half width must be positive".into()),
            ),
            ProfileKind::Samples { values }
                if values.len() < 2 || values.iter().any(|v| !v.is_finite()) =>
            {
                Err(Error::InvalidParameter(
                    "profile samples must be ≥ 2 finite values".into(),
                ))
            }
            ProfileKind::Sum { terms } => terms.iter().try_for_each(|t| self.validate_kind(t)),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if !(0.0..=self.length).contains(&t) {
            return 0.0;
        }
        self.eval_kind(&self.kind, t)
    }

    fn eval_kind(&self, k: &ProfileKind, t: f64) -> f64 {
        let l = self.length;
        match k {
            ProfileKind::Bump {
                center,
                half_width,
                amplitude,
            } => {
                let u = (t - center) / half_width;
                if u.abs() < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
            ProfileKind::Sine { mode, amplitude } => {
                amplitude * (2.0 * PI * *mode as f64 * t / l).sin()
            }
            ProfileKind::Cosine { mode, amplitude } => {
                amplitude * (2.0 * PI * *mode as f64 * t / l).cos()
            }
            ProfileKind::TruncatedExp { rate, amplitude } => amplitude * (-rate * t).exp(),
            ProfileKind::Constant { value } => *value,
            ProfileKind::Samples { values } => {
                let n = values.len() - 1;
                let x = (t / l * n as f64).clamp(0.0, n as f64);
                let i = (x.floor() as usize).min(n - 1);
                let w = x - i as f64;
                (1.0 - w) * values[i] + w * values[i + 1]
            }
            ProfileKind::Sum { terms } => terms.iter().map(|k| self.eval_kind(k, t)).sum(),
        }
    }

    /// `∫₀ᴸ g` by composite Simpson.
    pub fn integral(&self, quad: &Quadrature) -> f64 {
        simpson(
            |t| self.eval(t),
            0.0,
            self.length,
            quad.intervals(self.length),
        )
    }

    /// Largest `|g|` over a dense sample of `[0, length]`.
    pub fn sup_norm(&self) -> f64 {
        (0..=4096)
            .map(|i| self.eval(self.length * i as f64 / 4096.0).abs())
            .fold(0.0, f64::max)
    }

    /// Checks by sampling that `g` vanishes on `[0, ε·L] ∪ [(1 − ε)·L, L]`.
    pub fn supported_within(&self, eps: f64) -> bool {
        let band = eps * self.length;
        (0..=1000).all(|i| {
            let s = band * i as f64 / 1000.0;
            self.eval(s) == 0.0 && self.eval(self.length - s) == 0.0
        })
    }
}
