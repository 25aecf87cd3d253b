use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridField, GridSpec};
use crate::geom::Vec2;
use crate::reduce;
use crate::transforms::{CellMask, Sinogram};
use crate::unfolding::DihedralUnfolding;

/// Row-compressed sparse matrix with a column-compressed copy for the
/// transpose product.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    t_vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists; duplicate columns in a
    /// row are summed.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut counts = vec![0usize; cols];
        for mut r in rows.iter().cloned() {
            r.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in r {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    vals.push(v);
                    counts[c] += 1;
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut col_ptr = vec![0usize; cols + 1];
        for c in 0..cols {
            col_ptr[c + 1] = col_ptr[c] + counts[c];
        }
        let mut fill = col_ptr.clone();
        let mut row_idx = vec![0; col_idx.len()];
        let mut t_vals = vec![0.0; col_idx.len()];
        for r in 0..rows.len() {
            for e in row_ptr[r]..row_ptr[r + 1] {
                let c = col_idx[e];
                row_idx[fill[c]] = r;
                t_vals[fill[c]] = vals[e];
                fill[c] += 1;
            }
        }
        Self {
            rows: rows.len(),
            cols,
            row_ptr,
            col_idx,
            vals,
            col_ptr,
            row_idx,
            t_vals,
        }
    }

    /// Copy with every entry in a column rejected by `keep` removed.
    pub fn retain_columns(&self, keep: impl Fn(usize) -> bool) -> Self {
        let rows = (0..self.rows)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .filter(|&e| keep(self.col_idx[e]))
                    .map(|e| (self.col_idx[e], self.vals[e]))
                    .collect()
            })
            .collect();
        Self::from_rows(self.cols, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .into_par_iter()
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|e| self.vals[e] * x[self.col_idx[e]])
                    .sum()
            })
            .collect()
    }

    pub fn tmul(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .into_par_iter()
            .map(|c| {
                (self.col_ptr[c]..self.col_ptr[c + 1])
                    .map(|e| self.t_vals[e] * y[self.row_idx[e]])
                    .sum()
            })
            .collect()
    }
}

/// Intersection lengths of the segment `a → b` with the pixels of `grid`
/// (pixel `(i, j)` is the square of side `spacing` centred on node `(i, j)`).
pub fn siddon_segment(grid: &GridSpec, a: Vec2, b: Vec2, out: &mut Vec<(usize, f64)>) {
    let len = a.dist(b);
    if len == 0.0 {
        return;
    }
    let h = grid.spacing;
    let lo = grid.origin - Vec2::new(0.5 * h, 0.5 * h);
    let d = b - a;
    let mut ts = vec![0.0, 1.0];
    for (o, dd, lo, n) in [(a.x, d.x, lo.x, grid.nx), (a.y, d.y, lo.y, grid.ny)] {
        if dd == 0.0 {
            continue;
        }
        let (ua, ub) = ((o - lo) / h, (o + dd - lo) / h);
        let k0 = ua.min(ub).ceil().max(0.0) as i64;
        let k1 = (ua.max(ub).floor() as i64).min(n as i64);
        for k in k0..=k1 {
            let t = (lo + k as f64 * h - o) / dd;
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    for w in ts.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            continue;
        }
        let m = a + d * (0.5 * (w[0] + w[1]));
        let fi = ((m.x - lo.x) / h).floor();
        let fj = ((m.y - lo.y) / h).floor();
        if fi < 0.0 || fj < 0.0 || fi >= grid.nx as f64 || fj >= grid.ny as f64 {
            continue;
        }
        out.push((fj as usize * grid.nx + fi as usize, dt * len));
    }
}

/// Integrals of the bilinear node functions of `grid` along `a → b`. The
/// interpolant is quadratic along the segment inside each cell, so Simpson's
/// rule per cell piece is exact.
pub fn bilinear_segment(grid: &GridSpec, a: Vec2, b: Vec2, out: &mut Vec<(usize, f64)>) {
    let len = a.dist(b);
    if len == 0.0 {
        return;
    }
    let h = grid.spacing;
    let o = grid.origin;
    let d = b - a;
    let mut ts = vec![0.0, 1.0];
    for (p, dd, lo, n) in [(a.x, d.x, o.x, grid.nx), (a.y, d.y, o.y, grid.ny)] {
        if dd == 0.0 {
            continue;
        }
        let (ua, ub) = ((p - lo) / h, (p + dd - lo) / h);
        let k0 = ua.min(ub).ceil().max(0.0) as i64;
        let k1 = (ua.max(ub).floor() as i64).min(n as i64 - 1);
        for k in k0..=k1 {
            let t = (lo + k as f64 * h - p) / dd;
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    let (mx, my) = ((grid.nx - 1) as f64, (grid.ny - 1) as f64);
    for w in ts.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            continue;
        }
        let m = a + d * (0.5 * (w[0] + w[1]));
        let (fx, fy) = ((m.x - o.x) / h, (m.y - o.y) / h);
        if fx < 0.0 || fy < 0.0 || fx > mx || fy > my {
            continue;
        }
        let i = (fx.floor() as usize).min(grid.nx - 2);
        let j = (fy.floor() as usize).min(grid.ny - 2);
        let mut acc = [0.0; 4];
        for (t, wt) in [(w[0], 1.0), (0.5 * (w[0] + w[1]), 4.0), (w[1], 1.0)] {
            let q = a + d * t;
            let tx = (q.x - o.x) / h - i as f64;
            let ty = (q.y - o.y) / h - j as f64;
            acc[0] += wt * (1.0 - tx) * (1.0 - ty);
            acc[1] += wt * tx * (1.0 - ty);
            acc[2] += wt * (1.0 - tx) * ty;
            acc[3] += wt * tx * ty;
        }
        let scale = dt * len / 6.0;
        let base = j * grid.nx + i;
        for (k, idx) in [base, base + 1, base + grid.nx, base + grid.nx + 1]
            .into_iter()
            .enumerate()
        {
            out.push((idx, acc[k] * scale));
        }
    }
}

/// Discretization of the unknown field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Piecewise constant pixels centred on the grid nodes.
    Pixel,
    /// Bilinear interpolation between grid nodes.
    #[default]
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CglsParams {
    pub basis: Basis,
    /// Unknowns at grid nodes closer than this to the apex are held at zero.
    pub apex_margin: f64,
    /// Unknowns whose unfolded copies come closer than this to the filler
    /// cone are held at zero.
    pub shadow_margin: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub stagnation_window: usize,
    pub stagnation_ratio: f64,
}

impl Default for CglsParams {
    fn default() -> Self {
        Self {
            basis: Basis::Bilinear,
            apex_margin: 0.0,
            shadow_margin: 0.0,
            tolerance: 1e-6,
            max_iterations: 500,
            stagnation_window: 50,
            stagnation_ratio: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// The data residual fell by less than the stagnation ratio over the
    /// stagnation window; the iterate is still returned.
    SlowConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CglsOutcome {
    pub x: Vec<f64>,
    /// `‖b − A x_k‖` for `k = 0, 1, …`.
    pub residuals: Vec<f64>,
    /// `‖Aᵀ(b − A x_k)‖ / ‖Aᵀ b‖`.
    pub normal_residuals: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    /// `√(λmax/λmin)` of the Lanczos tridiagonal built from the iteration
    /// coefficients: an estimate of the condition number of `A`.
    pub condition_estimate: Option<f64>,
}

/// Conjugate gradient on the normal equations `AᵀA x = Aᵀb`, from `x = 0`.
pub fn cgls(a: &SparseMatrix, b: &[f64], params: &CglsParams) -> Result<CglsOutcome> {
    if b.len() != a.rows() {
        return Err(Error::InvalidParameter(format!(
            "data length {} ≠ {} rows",
            b.len(),
            a.rows()
        )));
    }
    let mut x = vec![0.0; a.cols()];
    let mut r = b.to_vec();
    let mut s = a.tmul(&r);
    let mut p = s.clone();
    let s0 = reduce::norm2(&s);
    let mut gamma = s0 * s0;
    let mut residuals = vec![reduce::norm2(&r)];
    let mut normal_residuals = vec![if s0 > 0.0 { 1.0 } else { 0.0 }];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut stop = StopReason::MaxIterations;
    if s0 == 0.0 {
        stop = StopReason::Converged;
    }
    let mut k = 0;
    while stop == StopReason::MaxIterations && k < params.max_iterations {
        let q = a.mul(&p);
        let qq = reduce::dot(&q, &q);
        if qq == 0.0 {
            stop = StopReason::Converged;
            break;
        }
        let alpha = gamma / qq;
        reduce::axpy(alpha, &p, &mut x);
        reduce::axpy(-alpha, &q, &mut r);
        s = a.tmul(&r);
        let g_new = reduce::dot(&s, &s);
        let beta = g_new / gamma;
        p.par_iter_mut()
            .zip(s.par_iter())
            .for_each(|(pi, si)| *pi = si + beta * *pi);
        gamma = g_new;
        alphas.push(alpha);
        betas.push(beta);
        k += 1;
        residuals.push(reduce::norm2(&r));
        let rel = g_new.sqrt() / s0;
        normal_residuals.push(rel);
        if rel < params.tolerance {
            stop = StopReason::Converged;
        } else if k >= params.stagnation_window {
            let old = residuals[k - params.stagnation_window];
            if old - residuals[k] < params.stagnation_ratio * old {
                stop = StopReason::SlowConvergence;
            }
        }
    }
    Ok(CglsOutcome {
        x,
        residuals,
        normal_residuals,
        iterations: k,
        stop,
        condition_estimate: lanczos_condition(&alphas, &betas),
    })
}

fn lanczos_condition(alphas: &[f64], betas: &[f64]) -> Option<f64> {
    let n = alphas.len();
    if n < 2 {
        return None;
    }
    let mut t = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        t[(k, k)] = 1.0 / alphas[k]
            + if k > 0 {
                betas[k - 1] / alphas[k - 1]
            } else {
                0.0
            };
        if k + 1 < n {
            let e = betas[k].sqrt() / alphas[k];
            t[(k, k + 1)] = e;
            t[(k + 1, k)] = e;
        }
    }
    let ev = SymmetricEigen::new(t).eigenvalues;
    let hi = ev.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ev.iter().cloned().fold(f64::MAX, f64::min);
    (lo > 0.0).then(|| (hi / lo).sqrt())
}

/// Discretized broken ray operator: one row per measured sinogram cell,
/// one column per pixel of `grid`.
pub fn broken_ray_matrix(
    u: &DihedralUnfolding,
    sino: &Sinogram,
    grid: &GridSpec,
    basis: Basis,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let g = sino.geometry;
    let rows: Vec<Result<Option<(Vec<(usize, f64)>, f64)>>> = (0..g.len())
        .into_par_iter()
        .map(|c| {
            if sino.mask[c] != CellMask::Measured {
                return Ok(None);
            }
            let chords = match u.fold_line_chords(&g.line(c / g.n_offsets, c % g.n_offsets)) {
                Ok(ch) => ch,
                Err(
                    Error::EmptyIntersection
                    | Error::ApexLine
                    | Error::FillerConeHit
                    | Error::TipHit { .. },
                ) => return Ok(None),
                Err(e) => return Err(e),
            };
            let mut row = Vec::new();
            for ch in &chords {
                for (a, b) in ch.ray.segments() {
                    match basis {
                        Basis::Pixel => siddon_segment(grid, a, b, &mut row),
                        Basis::Bilinear => bilinear_segment(grid, a, b, &mut row),
                    }
                }
            }
            Ok((!row.is_empty()).then_some((row, sino.values[c])))
        })
        .collect();
    let mut entries = Vec::new();
    let mut b = Vec::new();
    for r in rows {
        if let Some((row, v)) = r? {
            entries.push(row);
            b.push(v);
        }
    }
    if entries.is_empty() {
        return Err(Error::DegenerateGeometry);
    }
    Ok((SparseMatrix::from_rows(grid.len(), entries), b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralReconstruction {
    pub field: GridField,
    pub residuals: Vec<f64>,
    pub normal_residuals: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    pub condition_estimate: Option<f64>,
    pub rows: usize,
    pub nonzeros: usize,
}

/// Least squares reconstruction on the measured lines only.
pub fn reconstruct_cone_general(
    u: &DihedralUnfolding,
    sino: &Sinogram,
    grid: GridSpec,
    params: &CglsParams,
) -> Result<GeneralReconstruction> {
    grid.validate()?;
    if !(params.apex_margin >= 0.0 && params.shadow_margin >= 0.0) {
        return Err(Error::InvalidParameter(
            "support margins must be nonnegative".into(),
        ));
    }
    let (mut a, b) = broken_ray_matrix(u, sino, &grid, params.basis)?;
    if params.apex_margin > 0.0 || params.shadow_margin > 0.0 {
        a = a.retain_columns(|c| {
            let x = grid.node(c % grid.nx, c / grid.nx);
            x.norm() >= params.apex_margin
                && u.filler_distance(x)
                    .is_none_or(|d| d >= params.shadow_margin)
        });
    }
    let out = cgls(&a, &b, params)?;
    Ok(GeneralReconstruction {
        field: GridField::new(grid, out.x)?,
        residuals: out.residuals,
        normal_residuals: out.normal_residuals,
        iterations: out.iterations,
        stop: out.stop,
        condition_estimate: out.condition_estimate,
        rows: a.rows(),
        nonzeros: a.nnz(),
    })
}
