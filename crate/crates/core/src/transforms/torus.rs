use std::collections::BTreeMap;
use std::fmt::Write as _;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::trapezoid_periodic;
use crate::unfolding::{cube_fold_point, CubeOrbit};

/// Nodes per period of the trapezoid rule for closed geodesics.
pub const DEFAULT_TORUS_NODES: usize = 256;

/// Smallest trapezoid node count that integrates a band-`band` field exactly
/// along every geodesic used by the Fourier inversion. Those directions have
/// entries bounded by `band`, so `|m·k| ≤ dim·band²`.
pub fn exact_torus_nodes(dim: usize, band: u32) -> usize {
    dim * (band as usize).pow(2) + 1
}

/// Trigonometric term on the torus `(ℝ/2ℤ)ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum TorusTerm {
    /// `amplitude·cos(π m·x)`
    Cos { m: Vec<i64>, amplitude: f64 },
    /// `amplitude·sin(π m·x)`
    Sin { m: Vec<i64>, amplitude: f64 },
    /// `amplitude·∏ᵢ cos(π mᵢ xᵢ)`
    CosProduct { m: Vec<i64>, amplitude: f64 },
}

impl TorusTerm {
    fn m(&self) -> &[i64] {
        match self {
            TorusTerm::Cos { m, .. }
            | TorusTerm::Sin { m, .. }
            | TorusTerm::CosProduct { m, .. } => m,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let pi = std::f64::consts::PI;
        let phase = |m: &[i64]| pi * m.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum::<f64>();
        match self {
            TorusTerm::Cos { m, amplitude } => amplitude * phase(m).cos(),
            TorusTerm::Sin { m, amplitude } => amplitude * phase(m).sin(),
            TorusTerm::CosProduct { m, amplitude } => {
                amplitude
                    * m.iter()
                        .zip(x)
                        .map(|(&a, &b)| (pi * a as f64 * b).cos())
                        .product::<f64>()
            }
        }
    }

    fn partial(&self, axis: usize, order: u32, x: &[f64]) -> f64 {
        let pi = std::f64::consts::PI;
        let shift = order as f64 * std::f64::consts::FRAC_PI_2;
        let m = self.m();
        let scale = (pi * m[axis] as f64).powi(order as i32);
        let phase = pi * m.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum::<f64>();
        match self {
            TorusTerm::Cos { amplitude, .. } => amplitude * scale * (phase + shift).cos(),
            TorusTerm::Sin { amplitude, .. } => amplitude * scale * (phase + shift).sin(),
            TorusTerm::CosProduct { amplitude, .. } => {
                let mut v = amplitude * scale;
                for (i, (&a, &b)) in m.iter().zip(x).enumerate() {
                    let arg = pi * a as f64 * b;
                    v *= if i == axis {
                        (arg + shift).cos()
                    } else {
                        arg.cos()
                    };
                }
                v
            }
        }
    }

    fn amplitude(&self) -> f64 {
        match self {
            TorusTerm::Cos { amplitude, .. }
            | TorusTerm::Sin { amplitude, .. }
            | TorusTerm::CosProduct { amplitude, .. } => *amplitude,
        }
    }

    fn add_coefficients(&self, out: &mut BTreeMap<Vec<i64>, Complex64>) {
        let mut add =
            |m: Vec<i64>, c: Complex64| *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        match self {
            TorusTerm::Cos { m, amplitude } => {
                if m.iter().all(|&v| v == 0) {
                    add(m.clone(), Complex64::new(*amplitude, 0.0));
                } else {
                    add(m.clone(), Complex64::new(0.5 * amplitude, 0.0));
                    add(
                        m.iter().map(|v| -v).collect(),
                        Complex64::new(0.5 * amplitude, 0.0),
                    );
                }
            }
            TorusTerm::Sin { m, amplitude } => {
                if m.iter().any(|&v| v != 0) {
                    add(m.clone(), Complex64::new(0.0, -0.5 * amplitude));
                    add(
                        m.iter().map(|v| -v).collect(),
                        Complex64::new(0.0, 0.5 * amplitude),
                    );
                }
            }
            TorusTerm::CosProduct { m, amplitude } => {
                let nz: Vec<usize> = (0..m.len()).filter(|&i| m[i] != 0).collect();
                let w = amplitude / (1u64 << nz.len()) as f64;
                for signs in 0..(1u32 << nz.len()) {
                    let mut v = m.clone();
                    for (b, &i) in nz.iter().enumerate() {
                        if signs >> b & 1 == 1 {
                            v[i] = -v[i];
                        }
                    }
                    add(v, Complex64::new(w, 0.0));
                }
            }
        }
    }
}

/// Trigonometric polynomial on the torus of period 2 per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusField {
    pub dim: usize,
    pub terms: Vec<TorusTerm>,
}

impl TorusField {
    pub fn new(dim: usize, terms: Vec<TorusTerm>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "torus dimension must be 1..=3, got {dim}"
            )));
        }
        if let Some(t) = terms.iter().find(|t| t.m().len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "frequency {:?} does not have dimension {dim}",
                t.m()
            )));
        }
        Ok(Self { dim, terms })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// `∂ᵢʲ f(x)`.
    pub fn partial(&self, axis: usize, order: u32, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.partial(axis, order, x)).sum()
    }

    /// `Σ |amplitude|`, a bound for `|f|`.
    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude().abs()).sum()
    }

    /// Largest `|mᵢ|` over all terms.
    pub fn band(&self) -> u32 {
        self.terms
            .iter()
            .flat_map(|t| t.m().iter())
            .map(|v| v.unsigned_abs() as u32)
            .max()
            .unwrap_or(0)
    }

    /// Exact coefficients `c_m` of `Σ c_m e^{iπ m·x}`.
    pub fn coefficients(&self) -> BTreeMap<Vec<i64>, Complex64> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            t.add_coefficients(&mut out);
        }
        out
    }
}

fn check_orbit(k: &[i64], x0: &[f64]) -> Result<()> {
    if k.len() != x0.len() || k.iter().all(|&v| v == 0) {
        return Err(Error::InvalidOrbit(format!(
            "bad geodesic k = {k:?}, x0 = {x0:?}"
        )));
    }
    Ok(())
}

/// Unit-speed integral of `f` over one period of `t ↦ x0 + 2t·k`, whose
/// length is `2|k|`.
pub fn torus_geodesic_integral<F: Fn(&[f64]) -> f64>(
    f: F,
    k: &[i64],
    x0: &[f64],
    nodes: usize,
) -> Result<f64> {
    check_orbit(k, x0)?;
    let len = 2.0 * k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
    let mut x = vec![0.0; k.len()];
    let mean = trapezoid_periodic(
        |t| {
            for i in 0..k.len() {
                x[i] = x0[i] + 2.0 * t * k[i] as f64;
            }
            f(&x)
        },
        0.0,
        1.0,
        nodes,
    );
    let v = mean * len;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature {
            x: x0[0],
            y: x0.get(1).copied().unwrap_or(0.0),
        })
    }
}

/// Periodic broken ray transform of a cube field over a folded orbit.
pub fn periodic_brt_cube<F: Fn(&[f64]) -> f64>(
    f: F,
    orbit: &CubeOrbit,
    nodes: usize,
) -> Result<f64> {
    torus_geodesic_integral(|x| f(&cube_fold_point(x)), &orbit.k, &orbit.x0, nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSample {
    pub k: Vec<i64>,
    pub x0: Vec<f64>,
    pub value: f64,
}

/// CSV with header `k1..kn,x0_1..x0_n,value`.
pub fn torus_data_csv(dim: usize, samples: &[TorusSample]) -> String {
    let mut s = String::new();
    let ks: Vec<String> = (1..=dim).map(|i| format!("k{i}")).collect();
    let xs: Vec<String> = (1..=dim).map(|i| format!("x0_{i}")).collect();
    let _ = writeln!(s, "{},{},value", ks.join(","), xs.join(","));
    for r in samples {
        let k: Vec<String> = r.k.iter().map(|v| v.to_string()).collect();
        let x: Vec<String> = r.x0.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{},{},{:e}", k.join(","), x.join(","), r.value);
    }
    s
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    #[test]
    fn partial_derivatives_match_closed_forms() {
        let f = TorusField::new(
            2,
            vec![
                TorusTerm::CosProduct {
                    m: vec![2, 3],
                    amplitude: 1.5,
                },
                TorusTerm::Sin {
                    m: vec![1, -1],
                    amplitude: 0.5,
                },
            ],
        )
        .unwrap();
        let (x, y) = (0.31, 0.77);
        let want = -1.5 * 2.0 * PI * (2.0 * PI * x).sin() * (3.0 * PI * y).cos()
            + 0.5 * PI * (PI * (x - y)).cos();
        assert!((f.partial(0, 1, &[x, y]) - want).abs() < 1e-12);
        let want3 = 1.5 * (3.0 * PI).powi(3) * (2.0 * PI * x).cos() * (3.0 * PI * y).sin()
            + 0.5 * PI.powi(3) * (PI * (x - y)).cos();
        assert!((f.partial(1, 3, &[x, y]) - want3).abs() < 1e-9);
        assert_eq!(f.amplitude_sum(), 2.0);
    }

    use super::*;
    use crate::unfolding::torus_geodesic_to_cube_orbit;

    fn n(k: &[i64]) -> f64 {
        k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt()
    }

    #[test]
    fn constant_gives_length_times_value() {
        let k = [2, -1];
        let v = torus_geodesic_integral(|_| 1.5, &k, &[0.3, 0.1], 64).unwrap();
        assert!((v - 2.0 * 1.5 * n(&k)).abs() < 1e-13);
    }

    #[test]
    fn cosine_integrals_follow_the_antiderivative() {
        let pi = std::f64::consts::PI;
        let m = [1i64, 2];
        let f = |x: &[f64]| (pi * (m[0] as f64 * x[0] + m[1] as f64 * x[1])).cos();
        // k ⊥ m: the phase is constant along the orbit
        let k = [-2, 1];
        let x0 = [0.17, 0.61];
        let v = torus_geodesic_integral(f, &k, &x0, DEFAULT_TORUS_NODES).unwrap();
        let want = 2.0 * n(&k) * (pi * (x0[0] + 2.0 * x0[1])).cos();
        assert!((v - want).abs() < 1e-12);
        // k·m ≠ 0: a whole number of periods cancels
        let v = torus_geodesic_integral(f, &[1, 1], &x0, DEFAULT_TORUS_NODES).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn shift_along_the_orbit_is_invisible() {
        let f = TorusField::new(
            2,
            vec![
                TorusTerm::CosProduct {
                    m: vec![3, 2],
                    amplitude: 1.0,
                },
                TorusTerm::Sin {
                    m: vec![1, -1],
                    amplitude: 0.4,
                },
            ],
        )
        .unwrap();
        let k = [1, 2];
        let a = torus_geodesic_integral(|x| f.eval(x), &k, &[0.2, 0.3], 128).unwrap();
        let b = torus_geodesic_integral(
            |x| f.eval(x),
            &k,
            &[0.2 + 2.0 * 0.37, 0.3 + 4.0 * 0.37],
            128,
        )
        .unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cube_axis_orbit_of_cos_product() {
        // ∫ over the orbit of cos(πx)cos(πy) for k = (1, 0), x0 = (0, 0.5): the y
        // factor vanishes, and for x0 = (0, 0.25) the x factor integrates to 0
        let pi = std::f64::consts::PI;
        let f = |x: &[f64]| (pi * x[0]).cos() * (pi * x[1]).cos();
        let o = torus_geodesic_to_cube_orbit(&[1, 0], &[0.0, 0.5]).unwrap();
        assert!(periodic_brt_cube(f, &o, 64).unwrap().abs() < 1e-15);
        let g = |x: &[f64]| (pi * x[0]).cos().powi(2) * (pi * x[1]).cos();
        let o = torus_geodesic_to_cube_orbit(&[1, 0], &[0.0, 0.25]).unwrap();
        // ∫₀² cos²(πs) ds = 1
        let want = (pi * 0.25).cos();
        assert!((periodic_brt_cube(g, &o, 64).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn coefficients_reproduce_the_field() {
        let f = TorusField::new(
            3,
            vec![
                TorusTerm::CosProduct {
                    m: vec![1, 0, 2],
                    amplitude: 0.7,
                },
                TorusTerm::Cos {
                    m: vec![0, 0, 0],
                    amplitude: 0.2,
                },
                TorusTerm::Sin {
                    m: vec![1, 1, -1],
                    amplitude: -0.3,
                },
            ],
        )
        .unwrap();
        let c = f.coefficients();
        let x = [0.31, 1.22, 0.57];
        let pi = std::f64::consts::PI;
        let s: Complex64 = c
            .iter()
            .map(|(m, v)| {
                v * Complex64::from_polar(
                    1.0,
                    pi * m.iter().zip(&x).map(|(&a, b)| a as f64 * b).sum::<f64>(),
                )
            })
            .sum();
        assert!((s.re - f.eval(&x)).abs() < 1e-14 && s.im.abs() < 1e-14);
        assert_eq!(f.band(), 2);
    }

    #[test]
    fn csv_layout() {
        let s = torus_data_csv(
            2,
            &[TorusSample {
                k: vec![1, -2],
                x0: vec![0.5, 0.25],
                value: 1.0,
            }],
        );
        assert_eq!(s.lines().next().unwrap(), "k1,k2,x0_1,x0_2,value");
        assert_eq!(s.lines().nth(1).unwrap(), "1,-2,5e-1,2.5e-1,1e0");
    }
}
