//! Named analytic phantoms with declared and verified symmetry classes.
//!
//! | key | field | parameters |
//! |---|---|---|
//! | `gaussian` | planar | `center`, `radius` (σ, default 0.08), `amplitude` |
//! | `disk` | planar | `center`, `radius`, `amplitude` |
//! | `torus-cosines` | torus | `dim`, `frequencies`, `amplitude` |
//! | `torus-folded-band` | torus | `dim`, `band`, `amplitude` |
//! | `torus-separable` | torus | `dim`, `band`, `amplitude` |
//! | `sphere-harmonics` | sphere | `harmonics` |
//! | `sphere-even-band` | sphere | `degree`, `amplitude` |
//! | `sphere-odd-extended` | sphere | `degree`, `amplitude` |

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{AnalyticField, Expr, ScalarField2D};
use crate::geom::{Rect, Vec2};
use crate::transforms::sphere::{HarmonicTerm, SphereField};
use crate::transforms::{TorusField, TorusTerm};
use crate::unfolding::{cube_fold_point, normalize3, octant_fold_point};

/// Sample count of the symmetry verification.
pub const SYMMETRY_SAMPLES: usize = 1000;
/// Largest accepted relative symmetry residual.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
const SYMMETRY_SEED: u64 = 0x5eed_0f_5e7;

/// Gaussian support boxes extend this many standard deviations.
const GAUSSIAN_SUPPORT_SIGMAS: f64 = 8.0;

pub const REGISTRY: &[&str] = &[
    "gaussian",
    "disk",
    "torus-cosines",
    "torus-folded-band",
    "torus-separable",
    "sphere-harmonics",
    "sphere-even-band",
    "sphere-odd-extended",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryClass {
    None,
    /// `F = F∘p` for the cube fold `p` of the torus `(ℝ/2ℤ)ⁿ`.
    FoldOfTorusField,
    /// `f(ω) = f(|ω₁|, |ω₂|, |ω₃|)` on the sphere.
    EvenSpherical,
    /// Normal derivatives of odd order `≤ n` vanish on the faces of `[0, 1]ⁿ`.
    NOddAtBoundary,
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryClass::None => "none",
            SymmetryClass::FoldOfTorusField => "fold-of-torus-field",
            SymmetryClass::EvenSpherical => "even-spherical",
            SymmetryClass::NOddAtBoundary => "n-odd-at-boundary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub key: String,
    pub symmetry: SymmetryClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<Vec<HarmonicTerm>>,
}

impl PhantomSpec {
    pub fn new(key: &str, symmetry: SymmetryClass) -> Self {
        Self {
            key: key.into(),
            symmetry,
            center: None,
            radius: None,
            amplitude: None,
            dim: None,
            band: None,
            frequencies: None,
            degree: None,
            harmonics: None,
        }
    }

    pub fn gaussian(center: Vec2, sigma: f64) -> Self {
        Self {
            center: Some(center),
            radius: Some(sigma),
            ..Self::new("gaussian", SymmetryClass::None)
        }
    }

    pub fn torus(key: &str, dim: usize, band: u32, symmetry: SymmetryClass) -> Self {
        Self {
            dim: Some(dim),
            band: Some(band),
            ..Self::new(key, symmetry)
        }
    }

    pub fn sphere(key: &str, degree: usize, symmetry: SymmetryClass) -> Self {
        Self {
            degree: Some(degree),
            ..Self::new(key, symmetry)
        }
    }

    fn require<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::InvalidParameter(format!("phantom {:?} needs `{name}`", self.key)))
    }

    fn amplitude(&self) -> f64 {
        self.amplitude.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum PhantomField {
    Planar(ScalarField2D),
    Torus(TorusField),
    Sphere(SphereField),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    pub spec: PhantomSpec,
    pub field: PhantomField,
    /// Sampled residual of the declared symmetry, relative to the field scale.
    pub symmetry_residual: f64,
}

impl Phantom {
    pub fn planar(&self) -> Option<&ScalarField2D> {
        match &self.field {
            PhantomField::Planar(f) => Some(f),
            _ => None,
        }
    }

    pub fn torus(&self) -> Option<&TorusField> {
        match &self.field {
            PhantomField::Torus(f) => Some(f),
            _ => None,
        }
    }

    pub fn sphere(&self) -> Option<&SphereField> {
        match &self.field {
            PhantomField::Sphere(f) => Some(f),
            _ => None,
        }
    }
}

/// Builds the phantom named by `spec.key` and verifies its declared symmetry.
pub fn make_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    let field = build(spec)?;
    let symmetry_residual = symmetry_residual(&field, spec.symmetry)?;
    if !(symmetry_residual < SYMMETRY_TOLERANCE) {
        return Err(Error::SymmetryMismatch {
            class: spec.symmetry.to_string(),
            residual: symmetry_residual,
        });
    }
    Ok(Phantom {
        spec: spec.clone(),
        field,
        symmetry_residual,
    })
}

fn build(spec: &PhantomSpec) -> Result<PhantomField> {
    let amp = spec.amplitude();
    match spec.key.as_str() {
        "gaussian" => {
            let center = spec.require(spec.center, "center")?;
            let sigma = spec.radius.unwrap_or(0.08);
            positive(sigma, "radius")?;
            let expr = Expr::Gaussian {
                center,
                sigma,
                amplitude: amp,
            };
            let support = Rect::centered(center, GAUSSIAN_SUPPORT_SIGMAS * sigma);
            Ok(PhantomField::Planar(
                AnalyticField::new(expr, support).into(),
            ))
        }
        "disk" => {
            let center = spec.require(spec.center, "center")?;
            let radius = spec.require(spec.radius, "radius")?;
            positive(radius, "radius")?;
            let expr = Expr::Disk {
                center,
                radius,
                amplitude: amp,
            };
            Ok(PhantomField::Planar(
                AnalyticField::new(expr, Rect::centered(center, radius)).into(),
            ))
        }
        "torus-cosines" => {
            let dim = spec.require(spec.dim, "dim")?;
            let freqs = spec.frequencies.clone().ok_or_else(|| {
                Error::InvalidParameter("phantom \"torus-cosines\" needs `frequencies`".into())
            })?;
            let terms = freqs
                .into_iter()
                .map(|m| {
                    let n2: i64 = m.iter().map(|v| v * v).sum();
                    TorusTerm::Cos {
                        m,
                        amplitude: amp / (1.0 + n2 as f64),
                    }
                })
                .collect();
            Ok(PhantomField::Torus(TorusField::new(dim, terms)?))
        }
        "torus-folded-band" => {
            let dim = spec.require(spec.dim, "dim")?;
            let band = spec.require(spec.band, "band")?;
            let terms = multi_indices(dim, band)
                .into_iter()
                .map(|m| {
                    let n2: i64 = m.iter().map(|v| v * v).sum();
                    let phase: i64 = m.iter().enumerate().map(|(i, v)| (i as i64 + 1) * v).sum();
                    TorusTerm::CosProduct {
                        amplitude: amp * (1.0 + phase as f64).cos() / (1.0 + n2 as f64),
                        m,
                    }
                })
                .collect();
            Ok(PhantomField::Torus(TorusField::new(dim, terms)?))
        }
        "torus-separable" => {
            let dim = spec.require(spec.dim, "dim")?;
            let band = spec.require(spec.band, "band")?;
            // ∏ᵢ Σⱼ aⱼ cos(π j xᵢ) with aⱼ = (−1)ʲ/(1 + j)²
            let a = |j: i64| if j % 2 == 0 { 1.0 } else { -1.0 } / ((1 + j) * (1 + j)) as f64;
            let terms = multi_indices(dim, band)
                .into_iter()
                .map(|m| TorusTerm::CosProduct {
                    amplitude: amp * m.iter().map(|&j| a(j)).product::<f64>(),
                    m,
                })
                .collect();
            Ok(PhantomField::Torus(TorusField::new(dim, terms)?))
        }
        "sphere-harmonics" => {
            let terms = spec.harmonics.clone().ok_or_else(|| {
                Error::InvalidParameter("phantom \"sphere-harmonics\" needs `harmonics`".into())
            })?;
            Ok(PhantomField::Sphere(SphereField::new(terms)?))
        }
        "sphere-even-band" => Ok(PhantomField::Sphere(SphereField::new(even_band(
            spec.require(spec.degree, "degree")?,
            amp,
        ))?)),
        "sphere-odd-extended" => {
            let mut terms = even_band(spec.require(spec.degree, "degree")?, amp);
            terms.push(HarmonicTerm {
                l: 2,
                m: -2,
                coefficient: 0.5 * amp,
            });
            Ok(PhantomField::Sphere(SphereField::new(terms)?))
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown phantom {other:?}; known: {}",
            REGISTRY.join(", ")
        ))),
    }
}

fn positive(v: f64, name: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "`{name}` must be positive, got {v}"
        )))
    }
}

/// All `m ∈ {0, …, band}^dim` in lexicographic order.
fn multi_indices(dim: usize, band: u32) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|m: Vec<i64>| {
                (0..=band as i64).map(move |j| {
                    let mut v = m.clone();
                    v.push(j);
                    v
                })
            })
            .collect();
    }
    out
}

/// `Σ c_lm Y_lm` over even `l ≤ degree` and even `0 ≤ m ≤ l`.
fn even_band(degree: usize, amp: f64) -> Vec<HarmonicTerm> {
    let mut terms = Vec::new();
    for l in (0..=degree).step_by(2) {
        for m in (0..=l as i64).step_by(2) {
            let c = amp * (1.0 + 0.7 * l as f64 + 0.3 * m as f64).sin() / (1.0 + l as f64);
            terms.push(HarmonicTerm {
                l,
                m,
                coefficient: c,
            });
        }
    }
    terms
}

fn symmetry_residual(field: &PhantomField, class: SymmetryClass) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(SYMMETRY_SEED);
    let mismatch = || {
        Error::InvalidParameter(format!(
            "symmetry class {class} does not apply to this field"
        ))
    };
    match (class, field) {
        (SymmetryClass::None, _) => Ok(0.0),
        (SymmetryClass::FoldOfTorusField, PhantomField::Torus(f)) => {
            let scale = f.amplitude_sum().max(f64::MIN_POSITIVE);
            let mut worst: f64 = 0.0;
            for _ in 0..SYMMETRY_SAMPLES {
                let x: Vec<f64> = (0..f.dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                worst = worst.max((f.eval(&x) - f.eval(&cube_fold_point(&x))).abs() / scale);
            }
            Ok(worst)
        }
        (SymmetryClass::NOddAtBoundary, PhantomField::Torus(f)) => {
            let scale = f.amplitude_sum().max(f64::MIN_POSITIVE);
            let band = f.band().max(1) as f64;
            let mut worst: f64 = 0.0;
            for _ in 0..SYMMETRY_SAMPLES {
                let mut x: Vec<f64> = (0..f.dim).map(|_| rng.gen_range(0.0..1.0)).collect();
                let axis = rng.gen_range(0..f.dim);
                x[axis] = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
                for order in (1..=f.dim as u32).step_by(2) {
                    let d = f.partial(axis, order, &x)
                        / (std::f64::consts::PI * band).powi(order as i32);
                    worst = worst.max(d.abs() / scale);
                }
            }
            Ok(worst)
        }
        (SymmetryClass::EvenSpherical, PhantomField::Sphere(f)) => {
            let scale = f
                .terms
                .iter()
                .map(|t| t.coefficient.abs())
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
            let mut worst: f64 = 0.0;
            for _ in 0..SYMMETRY_SAMPLES {
                let w = normalize3([
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]);
                worst = worst.max((f.eval(w) - f.eval(octant_fold_point(w))).abs() / scale);
            }
            Ok(worst)
        }
        _ => Err(mismatch()),
    }
}
