use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridField, GridSpec};
use crate::geom::Vec2;
use crate::planar::gcd;
use crate::unfolding::{torus_geodesic_to_cube_orbit, CubeOrbit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierEntry {
    pub re: f64,
    pub im: f64,
}

/// Coefficients `c_m`, `|m|_∞ ≤ band`, of `Σ c_m e^{iπ m·x}` on the torus
/// of period 2, stored densely in lexicographic order of `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTable {
    pub dim: usize,
    pub band: u32,
    pub entries: Vec<FourierEntry>,
}

impl FourierTable {
    fn side(&self) -> usize {
        2 * self.band as usize + 1
    }

    fn index(&self, m: &[i64]) -> Option<usize> {
        let b = self.band as i64;
        let mut idx = 0;
        for &v in m {
            if v.abs() > b {
                return None;
            }
            idx = idx * self.side() + (v + b) as usize;
        }
        Some(idx)
    }

    fn freq(&self, mut idx: usize) -> Vec<i64> {
        let mut m = vec![0; self.dim];
        for i in (0..self.dim).rev() {
            m[i] = (idx % self.side()) as i64 - self.band as i64;
            idx /= self.side();
        }
        m
    }

    pub fn get(&self, m: &[i64]) -> Complex64 {
        self.index(m).map_or(Complex64::new(0.0, 0.0), |i| {
            Complex64::new(self.entries[i].re, self.entries[i].im)
        })
    }

    pub fn frequencies(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.entries.len()).map(|i| self.freq(i))
    }

    /// Real part of the series at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, e) in self.entries.iter().enumerate() {
            if e.re == 0.0 && e.im == 0.0 {
                continue;
            }
            let m = self.freq(i);
            let ph = PI * m.iter().zip(x).map(|(&a, b)| a as f64 * b).sum::<f64>();
            acc += e.re * ph.cos() - e.im * ph.sin();
        }
        acc
    }

    /// Largest `|c_m − c_{σm}|` over sign flips `σ`: zero for folded fields.
    pub fn fold_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in self.frequencies() {
            let c = self.get(&m);
            for i in 0..self.dim {
                let mut f = m.clone();
                f[i] = -f[i];
                worst = worst.max((c - self.get(&f)).norm());
            }
        }
        worst
    }
}

/// Minimal-norm primitive `k ≠ 0` with `k·m = 0`, lexicographically
/// smallest among ties.
pub fn perpendicular_primitive(m: &[i64]) -> Result<Vec<i64>> {
    let n = m.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "no perpendicular direction in one dimension".into(),
        ));
    }
    let r = m.iter().map(|v| v.abs()).max().unwrap_or(0).max(1);
    let side = (2 * r + 1) as usize;
    let mut best: Option<(i64, Vec<i64>)> = None;
    for idx in 0..side.pow(n as u32) {
        let mut k = vec![0i64; n];
        let mut t = idx;
        for i in (0..n).rev() {
            k[i] = (t % side) as i64 - r;
            t /= side;
        }
        if k.iter().all(|&v| v == 0) || k.iter().zip(m).map(|(a, b)| a * b).sum::<i64>() != 0 {
            continue;
        }
        if k.iter().fold(0u64, |g, &v| gcd(g, v.unsigned_abs())) != 1 {
            continue;
        }
        let nn: i64 = k.iter().map(|v| v * v).sum();
        // enumeration runs in lexicographic order, so ties keep the first
        if best.as_ref().is_none_or(|(bn, _)| nn < *bn) {
            best = Some((nn, k));
        }
    }
    best.map(|b| b.1).ok_or_else(|| {
        Error::InvalidParameter(format!("no primitive direction perpendicular to {m:?}"))
    })
}

/// Generic grid offset keeping sample geodesics off the cube faces.
const OFFSETS: [f64; 3] = [0.137_035_999, 0.271_828_183, 0.314_159_265];

/// Recovers the coefficients of a band-limited torus field from its closed
/// geodesic integrals.
///
/// For each frequency `m` a primitive `k ⊥ m` is chosen. The integral along
/// `k` through `x0` is `2|k|·Σ_{m'⊥k} c_{m'} e^{iπ m'·x0}`, so a discrete
/// Fourier transform over a `(2B+1)ⁿ` grid of base points isolates `c_m`.
pub fn torus_fourier_inversion<D>(dim: usize, data: D, band: u32) -> Result<FourierTable>
where
    D: Fn(&[i64], &[f64]) -> Result<f64> + Sync,
{
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!(
            "torus inversion needs dimension 2 or 3, got {dim}"
        )));
    }
    let side = 2 * band as usize + 1;
    let total = side.pow(dim as u32);
    let mut table = FourierTable {
        dim,
        band,
        entries: vec![FourierEntry { re: 0.0, im: 0.0 }; total],
    };

    let mut groups: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for idx in 0..total {
        let m = table.freq(idx);
        let k = if m.iter().all(|&v| v == 0) {
            let mut e = vec![0; dim];
            e[0] = 1;
            e
        } else {
            perpendicular_primitive(&m)?
        };
        groups.entry(k).or_default().push(idx);
    }

    let points: Vec<Vec<f64>> = (0..total)
        .map(|idx| {
            let mut x = vec![0.0; dim];
            let mut t = idx;
            for i in (0..dim).rev() {
                x[i] = OFFSETS[i] * 2.0 / side as f64 + 2.0 * (t % side) as f64 / side as f64;
                t /= side;
            }
            x
        })
        .collect();

    let results: Vec<Result<Vec<(usize, Complex64)>>> = groups
        .par_iter()
        .map(|(k, members)| {
            let len = 2.0 * k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            let vals: Vec<f64> = points.iter().map(|x| data(k, x)).collect::<Result<_>>()?;
            Ok(members
                .iter()
                .map(|&idx| {
                    let m = table.freq(idx);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (x, v) in points.iter().zip(&vals) {
                        let ph = -PI * m.iter().zip(x).map(|(&a, b)| a as f64 * b).sum::<f64>();
                        acc += Complex64::from_polar(*v, ph);
                    }
                    (idx, acc / (total as f64 * len))
                })
                .collect())
        })
        .collect();
    for r in results {
        for (idx, c) in r? {
            table.entries[idx] = FourierEntry { re: c.re, im: c.im };
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeReconstruction {
    pub table: FourierTable,
    /// Nodes per axis of the evaluation grid on `[0, 1]ⁿ`.
    pub points: usize,
    /// Values at the grid nodes, first coordinate fastest.
    pub values: Vec<f64>,
}

impl CubeReconstruction {
    pub fn node(&self, mut idx: usize) -> Vec<f64> {
        let h = 1.0 / (self.points - 1) as f64;
        (0..self.table.dim)
            .map(|_| {
                let v = (idx % self.points) as f64 * h;
                idx /= self.points;
                v
            })
            .collect()
    }

    /// Planar grid view of a two-dimensional reconstruction.
    pub fn to_grid_field(&self) -> Result<GridField> {
        if self.table.dim != 2 {
            return Err(Error::InvalidParameter(
                "only two-dimensional reconstructions form a planar grid".into(),
            ));
        }
        let spec = GridSpec::new(
            self.points,
            self.points,
            Vec2::ZERO,
            1.0 / (self.points - 1) as f64,
        );
        GridField::new(spec, self.values.clone())
    }
}

/// Periodic broken ray data on the cube, lifted to torus geodesics through
/// the fold, inverted on the torus and evaluated on a grid of the cube.
pub fn reconstruct_cube_periodic<D>(
    dim: usize,
    data: D,
    band: u32,
    points: usize,
) -> Result<CubeReconstruction>
where
    D: Fn(&CubeOrbit) -> Result<f64> + Sync,
{
    if points < 2 {
        return Err(Error::InvalidParameter(
            "evaluation grid needs at least 2 points per axis".into(),
        ));
    }
    let table = torus_fourier_inversion(
        dim,
        |k, x0| data(&torus_geodesic_to_cube_orbit(k, x0)?),
        band,
    )?;
    let mut rec = CubeReconstruction {
        table,
        points,
        values: Vec::new(),
    };
    let n = points.pow(dim as u32);
    rec.values = (0..n)
        .into_par_iter()
        .map(|i| rec.table.eval(&rec.node(i)))
        .collect();
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{
        periodic_brt_cube, torus_geodesic_integral, TorusField, TorusTerm, DEFAULT_TORUS_NODES,
    };

    #[test]
    fn perpendicular_directions() {
        assert_eq!(perpendicular_primitive(&[1, 2]).unwrap(), vec![-2, 1]);
        assert_eq!(perpendicular_primitive(&[2, 4]).unwrap(), vec![-2, 1]);
        assert_eq!(perpendicular_primitive(&[0, 3]).unwrap(), vec![-1, 0]);
        let k = perpendicular_primitive(&[1, 2, 3]).unwrap();
        assert_eq!(k.iter().zip([1, 2, 3]).map(|(a, b)| a * b).sum::<i64>(), 0);
        assert_eq!(k, vec![-1, -1, 1]);
        assert!(perpendicular_primitive(&[3]).is_err());
    }

    fn invert(f: &TorusField, band: u32) -> FourierTable {
        torus_fourier_inversion(
            f.dim,
            |k, x0| torus_geodesic_integral(|x| f.eval(x), k, x0, DEFAULT_TORUS_NODES),
            band,
        )
        .unwrap()
    }

    #[test]
    fn constant_field() {
        let f = TorusField::new(
            2,
            vec![TorusTerm::Cos {
                m: vec![0, 0],
                amplitude: 1.7,
            }],
        )
        .unwrap();
        let t = invert(&f, 3);
        for m in t.frequencies() {
            let want = if m == [0, 0] { 1.7 } else { 0.0 };
            assert!((t.get(&m) - want).norm() < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn single_cosine() {
        let f = TorusField::new(
            2,
            vec![TorusTerm::Cos {
                m: vec![1, 2],
                amplitude: 1.0,
            }],
        )
        .unwrap();
        let t = invert(&f, 4);
        for m in t.frequencies() {
            let want = if m == [1, 2] || m == [-1, -2] {
                0.5
            } else {
                0.0
            };
            assert!((t.get(&m) - want).norm() < 1e-9, "{m:?}");
        }
    }

    #[test]
    fn three_dimensional_table_matches_analytic_expansion() {
        let f = TorusField::new(
            3,
            vec![
                TorusTerm::CosProduct {
                    m: vec![1, 3, 2],
                    amplitude: 0.8,
                },
                TorusTerm::CosProduct {
                    m: vec![4, 0, 1],
                    amplitude: -0.3,
                },
                TorusTerm::Sin {
                    m: vec![2, -1, 1],
                    amplitude: 0.25,
                },
            ],
        )
        .unwrap();
        let t = invert(&f, 4);
        let exact = f.coefficients();
        for m in t.frequencies() {
            let want = exact.get(&m).copied().unwrap_or_default();
            assert!((t.get(&m) - want).norm() < 1e-8, "{m:?}");
        }
    }

    #[test]
    fn cube_round_trip() {
        let f = TorusField::new(
            2,
            vec![
                TorusTerm::CosProduct {
                    m: vec![0, 0],
                    amplitude: 0.5,
                },
                TorusTerm::CosProduct {
                    m: vec![3, 1],
                    amplitude: 1.0,
                },
                TorusTerm::CosProduct {
                    m: vec![8, 5],
                    amplitude: 0.2,
                },
            ],
        )
        .unwrap();
        let rec = reconstruct_cube_periodic(
            2,
            |o| periodic_brt_cube(|x| f.eval(x), o, DEFAULT_TORUS_NODES),
            8,
            17,
        )
        .unwrap();
        for (i, v) in rec.values.iter().enumerate() {
            assert!((v - f.eval(&rec.node(i))).abs() < 1e-9);
        }
        assert!(rec.table.fold_asymmetry() < 1e-9);
    }
}
