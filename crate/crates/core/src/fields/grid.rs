use serde::{Deserialize, Serialize};

use super::Field2D;
use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};

/// Node-centred sampling lattice: node `(i, j)` sits at
/// `origin + (i·spacing, j·spacing)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub origin: Vec2,
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, origin: Vec2, spacing: f64) -> Self {
        Self {
            nx,
            ny,
            origin,
            spacing,
        }
    }

    /// `n × n` nodes spanning `[c − w, c + w]²`.
    pub fn square(n: usize, center: Vec2, half_width: f64) -> Self {
        let spacing = 2.0 * half_width / (n - 1) as f64;
        Self::new(n, n, center - Vec2::new(half_width, half_width), spacing)
    }

    /// Smallest grid with the given spacing covering `rect`.
    pub fn covering(rect: Rect, spacing: f64) -> Self {
        let nx = ((rect.max.x - rect.min.x) / spacing).ceil() as usize + 1;
        let ny = ((rect.max.y - rect.min.y) / spacing).ceil() as usize + 1;
        Self::new(nx.max(2), ny.max(2), rect.min, spacing)
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self) -> Rect {
        Rect::new(
            self.origin,
            self.origin
                + Vec2::new(
                    (self.nx - 1) as f64 * self.spacing,
                    (self.ny - 1) as f64 * self.spacing,
                ),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid must be at least 2x2, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) || !self.origin.is_finite() {
            return Err(Error::InvalidParameter(
                "grid spacing must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Bilinearly interpolated samples, stored row-major (`values[j·nx + i]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite grid value at index {k}"
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    /// Samples `f` at every node.
    pub fn sample<F: Field2D + ?Sized>(spec: GridSpec, f: &F) -> Self {
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                values.push(f.eval(spec.node(i, j)));
            }
        }
        Self { spec, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }
}

impl Field2D for GridField {
    fn eval(&self, p: Vec2) -> f64 {
        let s = &self.spec;
        let fx = (p.x - s.origin.x) / s.spacing;
        let fy = (p.y - s.origin.y) / s.spacing;
        let tol = 1e-9;
        let (mx, my) = ((s.nx - 1) as f64, (s.ny - 1) as f64);
        if !(fx >= -tol && fy >= -tol && fx <= mx + tol && fy <= my + tol) {
            return 0.0;
        }
        let fx = fx.clamp(0.0, mx);
        let fy = fy.clamp(0.0, my);
        let i = (fx.floor() as usize).min(s.nx - 2);
        let j = (fy.floor() as usize).min(s.ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    fn support(&self) -> Rect {
        self.spec.extent()
    }

    /// Grid-line crossings: the interpolant is quadratic along a line inside
    /// each cell, so Simpson is exact per piece.
    fn breakpoints(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        let s = &self.spec;
        let ext = s.extent();
        let Some((a, b)) = ext.clip_line(p, u) else {
            return;
        };
        let (a, b) = (a.max(0.0), b.min(len));
        if b <= a {
            return;
        }
        for t in [a, b] {
            if t > 0.0 && t < len {
                out.push(t);
            }
        }
        for (o, d, origin, n) in [(p.x, u.x, s.origin.x, s.nx), (p.y, u.y, s.origin.y, s.ny)] {
            if d.abs() < 1e-15 {
                continue;
            }
            let ia = (o + a * d - origin) / s.spacing;
            let ib = (o + b * d - origin) / s.spacing;
            let lo = ia.min(ib).ceil().max(0.0) as usize;
            let hi = (ia.max(ib).floor() as usize).min(n - 1);
            for k in lo..=hi {
                let t = (origin + k as f64 * s.spacing - o) / d;
                if t > a && t < b {
                    out.push(t);
                }
            }
        }
    }
}
