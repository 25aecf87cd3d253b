use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::NullReport;
use crate::error::{Error, Result};
use crate::fields::{simpson, ProfileKind, Quadrature, RadialProfile};

/// Unit-speed geodesic `γ_b(t) = (b·t, √(1 − b²)·t mod 2π)` on the cylinder
/// `[0, L] × S¹`, travelled for `t ∈ [0, L/b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderGeodesic {
    pub slope: f64,
}

impl CylinderGeodesic {
    pub fn new(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "slope must lie in (0, 1], got {slope}"
            )));
        }
        Ok(Self { slope })
    }

    pub fn axial(&self, t: f64) -> f64 {
        self.slope * t
    }

    pub fn angle(&self, t: f64) -> f64 {
        ((1.0 - self.slope * self.slope).sqrt() * t).rem_euclid(std::f64::consts::TAU)
    }

    /// Parameter length of the geodesic from one end of the cylinder to the other.
    pub fn span(&self, length: f64) -> f64 {
        length / self.slope
    }

    pub fn speed_squared(&self) -> f64 {
        self.slope * self.slope + (1.0 - self.slope * self.slope)
    }
}

/// `∫₀ᴸ e^{−s·u} g(u) du` by composite Simpson with `quad.intervals(L)` intervals.
pub fn laplace(g: &RadialProfile, s: f64, quad: &Quadrature) -> f64 {
    simpson(
        |u| (-s * u).exp() * g.eval(u),
        0.0,
        g.length,
        quad.intervals(g.length),
    )
}

/// Attenuated integral of `f(x, θ) = g(x)` along `γ_b`: `∫₀^{L/b} e^{−a·t} g(b·t) dt`.
/// Uses the same node count as [`laplace`], so the two agree to rounding.
pub fn cylinder_att_forward(g: &RadialProfile, a: f64, b: f64, quad: &Quadrature) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "attenuation must be a finite constant ≥ 0, got {a}"
        )));
    }
    let geo = CylinderGeodesic::new(b)?;
    let span = geo.span(g.length);
    // a point just past the far end would read g = 0
    Ok(simpson(
        |t| (-a * t).exp() * g.eval(geo.axial(t).min(g.length)),
        0.0,
        span,
        quad.intervals(g.length),
    ))
}

/// Basis profile `index`: a constant, then `sin`, `cos` pairs of increasing mode.
pub fn cylinder_mode(index: usize) -> ProfileKind {
    if index == 0 {
        return ProfileKind::Constant { value: 1.0 };
    }
    let mode = index.div_ceil(2) as u32;
    if index % 2 == 1 {
        ProfileKind::Sine {
            mode,
            amplitude: 1.0,
        }
    } else {
        ProfileKind::Cosine {
            mode,
            amplitude: 1.0,
        }
    }
}

fn slope_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|j| j as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderIdentityOutcome {
    pub attenuation: f64,
    pub length: f64,
    pub modes: usize,
    pub slopes: usize,
    /// Largest `|brt(γ_b) − b⁻¹·Lap(g)(a/b)|` over the grid.
    pub max_residual: f64,
}

impl CylinderIdentityOutcome {
    pub fn report(&self, tolerance: f64) -> NullReport {
        NullReport {
            check: "cylinder-identity".into(),
            parameters: json!({
                "attenuation": self.attenuation,
                "length": self.length,
                "modes": self.modes,
                "slopes": self.slopes,
                "tolerance": tolerance,
            }),
            max_residual: Some(self.max_residual),
            sigma_min: None,
            pass: self.max_residual < tolerance,
        }
    }
}

/// Checks `brt(γ_b) = b⁻¹·Lap(g)(a/b)` for the first `modes` basis profiles
/// and slopes `b = j/slopes`.
pub fn cylinder_identity_check(
    a: f64,
    length: f64,
    modes: usize,
    slopes: usize,
    quad: &Quadrature,
) -> Result<CylinderIdentityOutcome> {
    let bs = slope_grid(slopes);
    let mut worst: f64 = 0.0;
    for k in 0..modes {
        let g = RadialProfile::new(cylinder_mode(k), length)?;
        for &b in &bs {
            let lhs = cylinder_att_forward(&g, a, b, quad)?;
            let rhs = laplace(&g, a / b, quad) / b;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(CylinderIdentityOutcome {
        attenuation: a,
        length,
        modes,
        slopes,
        max_residual: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityProbe {
    pub attenuation: f64,
    pub length: f64,
    pub slopes: Vec<f64>,
    /// `matrix[j][k]`: transform of basis profile `k` along slope `j`.
    pub matrix: Vec<Vec<f64>>,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub sigma_min: f64,
    /// Right singular vector of `sigma_min`.
    pub null_vector: Vec<f64>,
}

impl InjectivityProbe {
    pub fn apply(&self, coefficients: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(coefficients).map(|(a, c)| a * c).sum())
            .collect()
    }

    /// `‖A·c‖₂`.
    pub fn direction_residual(&self, coefficients: &[f64]) -> f64 {
        self.apply(coefficients)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// For `a = 0` the probe passes when it finds a null direction, for
    /// `a > 0` when the smallest singular value is positive.
    pub fn report(&self, null_tolerance: f64) -> NullReport {
        let pass = if self.attenuation == 0.0 {
            self.sigma_min < null_tolerance
        } else {
            self.sigma_min > 0.0
        };
        NullReport {
            check: "att-probe".into(),
            parameters: json!({
                "attenuation": self.attenuation,
                "length": self.length,
                "basis_size": self.null_vector.len(),
                "slopes": self.slopes.len(),
            }),
            max_residual: None,
            sigma_min: Some(self.sigma_min),
            pass,
        }
    }
}

/// Smallest singular value of the map from the first `basis_size` basis
/// coefficients of `g` to its transforms along `n_slopes` geodesics.
pub fn cylinder_injectivity_probe(
    a: f64,
    length: f64,
    basis_size: usize,
    n_slopes: usize,
    quad: &Quadrature,
) -> Result<InjectivityProbe> {
    if basis_size == 0 {
        return Err(Error::InvalidParameter(
            "basis size must be positive".into(),
        ));
    }
    if basis_size > n_slopes {
        return Err(Error::UnderdeterminedProbe {
            basis: basis_size,
            slopes: n_slopes,
        });
    }
    let slopes = slope_grid(n_slopes);
    let basis = (0..basis_size)
        .map(|k| RadialProfile::new(cylinder_mode(k), length))
        .collect::<Result<Vec<_>>>()?;
    let matrix = slopes
        .par_iter()
        .map(|&b| {
            basis
                .iter()
                .map(|g| cylinder_att_forward(g, a, b, quad))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let m = DMatrix::from_fn(n_slopes, basis_size, |j, k| matrix[j][k]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right vectors");
    let (imin, &sigma_min) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    let null_vector = v_t.row(imin).iter().copied().collect();
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|x, y| y.total_cmp(x));
    Ok(InjectivityProbe {
        attenuation: a,
        length,
        slopes,
        matrix,
        singular_values,
        sigma_min,
        null_vector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geodesic_has_unit_speed() {
        let g = CylinderGeodesic::new(0.6).unwrap();
        assert!((g.speed_squared() - 1.0).abs() < 1e-15);
        assert!((g.span(2.0) - 2.0 / 0.6).abs() < 1e-15);
        assert!(CylinderGeodesic::new(0.0).is_err());
        assert!(CylinderGeodesic::new(1.5).is_err());
    }

    #[test]
    fn zero_profile_and_zero_mean_without_attenuation() {
        let q = Quadrature::default();
        let zero = RadialProfile::unit(ProfileKind::Constant { value: 0.0 }).unwrap();
        assert_eq!(cylinder_att_forward(&zero, 1.0, 0.5, &q).unwrap(), 0.0);
        let s = RadialProfile::new(
            ProfileKind::Sine {
                mode: 2,
                amplitude: 1.0,
            },
            3.0,
        )
        .unwrap();
        for b in [0.1, 0.5, 1.0] {
            assert!(cylinder_att_forward(&s, 0.0, b, &q).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn truncated_exponential_matches_closed_form() {
        // ∫₀ᴸ e^{−t}·e^{−t} dt = (1 − e^{−2L})/2
        let len = 4.0;
        let g = RadialProfile::new(
            ProfileKind::TruncatedExp {
                rate: 1.0,
                amplitude: 1.0,
            },
            len,
        )
        .unwrap();
        let v = cylinder_att_forward(&g, 1.0, 1.0, &Quadrature::default()).unwrap();
        assert!((v - (1.0 - (-2.0 * len).exp()) / 2.0).abs() < 1e-6);
    }

    #[test]
    fn basis_ordering() {
        assert_eq!(cylinder_mode(0), ProfileKind::Constant { value: 1.0 });
        assert_eq!(
            cylinder_mode(1),
            ProfileKind::Sine {
                mode: 1,
                amplitude: 1.0
            }
        );
        assert_eq!(
            cylinder_mode(2),
            ProfileKind::Cosine {
                mode: 1,
                amplitude: 1.0
            }
        );
        assert_eq!(
            cylinder_mode(5),
            ProfileKind::Sine {
                mode: 3,
                amplitude: 1.0
            }
        );
    }

    #[test]
    fn probe_errors_and_constant_profile() {
        let q = Quadrature::default();
        assert_eq!(
            cylinder_injectivity_probe(1.0, 1.0, 5, 4, &q),
            Err(Error::UnderdeterminedProbe {
                basis: 5,
                slopes: 4
            })
        );
        let p = cylinder_injectivity_probe(1.0, 1.0, 1, 10, &q).unwrap();
        assert!(p.sigma_min > 0.0);
        assert!(p.matrix.iter().all(|r| r[0] > 0.0));
    }

    #[test]
    fn unattenuated_probe_finds_the_sine_direction() {
        let p = cylinder_injectivity_probe(0.0, 1.0, 4, 16, &Quadrature::default()).unwrap();
        assert!(p.direction_residual(&[0.0, 1.0, 0.0, 0.0]) < 1e-10);
        assert!(p.sigma_min < 1e-10);
        assert!(p.report(1e-10).pass);
    }
}
