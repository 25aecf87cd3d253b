use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::line::radon_forward;
use crate::error::{Error, Result};
use crate::fields::{Field2D, Quadrature};
use crate::geom::Line;
use crate::planar::BrokenRay;
use crate::unfolding::DihedralUnfolding;

pub const SINOGRAM_CSV_HEADER: &str = "phi,s,value,mask";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMask {
    Measured,
    Excluded,
    Interpolated,
}

impl CellMask {
    pub fn as_str(self) -> &'static str {
        match self {
            CellMask::Measured => "measured",
            CellMask::Excluded => "excluded",
            CellMask::Interpolated => "interpolated",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "measured" => Some(CellMask::Measured),
            "excluded" => Some(CellMask::Excluded),
            "interpolated" => Some(CellMask::Interpolated),
            _ => None,
        }
    }
}

/// `n_angles` normal angles `iπ/n_angles` and `n_offsets` offsets evenly
/// spaced on `[−s_max, s_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinogramGeometry {
    pub n_angles: usize,
    pub n_offsets: usize,
    pub s_max: f64,
}

impl SinogramGeometry {
    pub fn new(n_angles: usize, n_offsets: usize, s_max: f64) -> Result<Self> {
        if n_angles < 2 || n_offsets < 3 || !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sinogram needs ≥ 2 angles, ≥ 3 offsets and s_max > 0, got {n_angles}×{n_offsets}, {s_max}"
            )));
        }
        Ok(Self {
            n_angles,
            n_offsets,
            s_max,
        })
    }

    /// 360 angles × 257 offsets with `s_max = 1.05·max_h`.
    pub fn standard(max_h: f64) -> Self {
        Self {
            n_angles: 360,
            n_offsets: 257,
            s_max: 1.05 * max_h,
        }
    }

    pub fn angle(&self, i: usize) -> f64 {
        PI * i as f64 / self.n_angles as f64
    }

    pub fn offset(&self, j: usize) -> f64 {
        -self.s_max + self.ds() * j as f64
    }

    pub fn ds(&self) -> f64 {
        2.0 * self.s_max / (self.n_offsets - 1) as f64
    }

    pub fn line(&self, i: usize, j: usize) -> Line {
        Line::new(self.offset(j), self.angle(i))
    }

    pub fn len(&self) -> usize {
        self.n_angles * self.n_offsets
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Line integrals indexed by (angle, offset), stored angle-major. Excluded
/// cells hold NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sinogram {
    pub geometry: SinogramGeometry,
    pub values: Vec<f64>,
    pub mask: Vec<CellMask>,
}

impl Sinogram {
    pub fn zeros(geometry: SinogramGeometry) -> Self {
        Self {
            geometry,
            values: vec![0.0; geometry.len()],
            mask: vec![CellMask::Measured; geometry.len()],
        }
    }

    /// Evaluates `f` on every line; all cells measured.
    pub fn from_fn<F: Fn(&Line) -> f64 + Sync>(geometry: SinogramGeometry, f: F) -> Self {
        let values = (0..geometry.len())
            .into_par_iter()
            .map(|c| f(&geometry.line(c / geometry.n_offsets, c % geometry.n_offsets)))
            .collect();
        Self {
            geometry,
            values,
            mask: vec![CellMask::Measured; geometry.len()],
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.geometry.n_offsets + j
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    pub fn cell_mask(&self, i: usize, j: usize) -> CellMask {
        self.mask[self.index(i, j)]
    }

    pub fn count(&self, m: CellMask) -> usize {
        self.mask.iter().filter(|&&x| x == m).count()
    }

    pub fn excluded_fraction(&self) -> f64 {
        self.count(CellMask::Excluded) as f64 / self.mask.len() as f64
    }

    /// `a·self + b·other` on cells where both carry values.
    pub fn combine(&self, a: f64, other: &Sinogram, b: f64) -> Result<Sinogram> {
        if self.geometry != other.geometry {
            return Err(Error::InvalidParameter("sinogram geometries differ".into()));
        }
        let mut out = self.clone();
        for c in 0..out.values.len() {
            if self.mask[c] == CellMask::Excluded || other.mask[c] == CellMask::Excluded {
                out.mask[c] = CellMask::Excluded;
                out.values[c] = f64::NAN;
            } else {
                out.values[c] = a * self.values[c] + b * other.values[c];
                if other.mask[c] == CellMask::Interpolated {
                    out.mask[c] = CellMask::Interpolated;
                }
            }
        }
        Ok(out)
    }

    /// Neighbour cell across the angular seam: `(φ ± π, −s)` is the same line.
    fn angular_neighbours(&self, i: usize, j: usize) -> [(usize, usize); 2] {
        let g = &self.geometry;
        let flip = g.n_offsets - 1 - j;
        let prev = if i == 0 {
            (g.n_angles - 1, flip)
        } else {
            (i - 1, j)
        };
        let next = if i + 1 == g.n_angles {
            (0, flip)
        } else {
            (i + 1, j)
        };
        [prev, next]
    }

    /// Fills excluded cells by linear interpolation: between angular
    /// neighbours when both carry values, otherwise between offset
    /// neighbours. Filled cells are flagged `Interpolated`. Returns the
    /// number of cells filled.
    pub fn fill_excluded_by_interpolation(&mut self) -> usize {
        let g = self.geometry;
        let has = |s: &Sinogram, (i, j): (usize, usize)| s.cell_mask(i, j) != CellMask::Excluded;
        let mut fills = Vec::new();
        for i in 0..g.n_angles {
            for j in 0..g.n_offsets {
                if has(self, (i, j)) {
                    continue;
                }
                let [a, b] = self.angular_neighbours(i, j);
                let v = if has(self, a) && has(self, b) {
                    Some(0.5 * (self.value(a.0, a.1) + self.value(b.0, b.1)))
                } else if j > 0
                    && j + 1 < g.n_offsets
                    && has(self, (i, j - 1))
                    && has(self, (i, j + 1))
                {
                    Some(0.5 * (self.value(i, j - 1) + self.value(i, j + 1)))
                } else {
                    let mut cands = vec![a, b];
                    if j > 0 {
                        cands.push((i, j - 1));
                    }
                    if j + 1 < g.n_offsets {
                        cands.push((i, j + 1));
                    }
                    cands
                        .into_iter()
                        .find(|&c| has(self, c))
                        .map(|c| self.value(c.0, c.1))
                };
                if let Some(v) = v {
                    fills.push((self.index(i, j), v));
                }
            }
        }
        for &(c, v) in &fills {
            self.values[c] = v;
            self.mask[c] = CellMask::Interpolated;
        }
        fills.len()
    }

    pub fn to_csv(&self) -> String {
        let g = &self.geometry;
        let mut s = String::with_capacity(self.values.len() * 48);
        s.push_str(SINOGRAM_CSV_HEADER);
        s.push('\n');
        for i in 0..g.n_angles {
            for j in 0..g.n_offsets {
                let m = self.cell_mask(i, j);
                let v = if m == CellMask::Excluded {
                    String::new()
                } else {
                    format!("{:e}", self.value(i, j))
                };
                let _ = writeln!(s, "{:e},{:e},{},{}", g.angle(i), g.offset(j), v, m.as_str());
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == SINOGRAM_CSV_HEADER => {}
            _ => {
                return Err(Error::Parse(format!(
                    "line 1: expected header '{SINOGRAM_CSV_HEADER}'"
                )))
            }
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", n + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let phi: f64 = f[0].trim().parse().map_err(|_| bad("bad phi"))?;
            let s: f64 = f[1].trim().parse().map_err(|_| bad("bad s"))?;
            let m = CellMask::parse(f[3].trim()).ok_or_else(|| bad("bad mask"))?;
            let v = if m == CellMask::Excluded {
                f64::NAN
            } else {
                f[2].trim().parse().map_err(|_| bad("bad value"))?
            };
            rows.push((phi, s, v, m));
        }
        if rows.is_empty() {
            return Err(Error::Parse("no sinogram rows".into()));
        }
        let n_off = rows.iter().take_while(|r| r.0 == rows[0].0).count();
        if n_off < 3 || rows.len() % n_off != 0 {
            return Err(Error::Parse(
                "rows do not form a rectangular sinogram".into(),
            ));
        }
        let geometry = SinogramGeometry::new(rows.len() / n_off, n_off, -rows[0].1)?;
        Ok(Self {
            geometry,
            values: rows.iter().map(|r| r.2).collect(),
            mask: rows.iter().map(|r| r.3).collect(),
        })
    }
}

/// Radon data of the unfolded field, obtained cell by cell from broken ray
/// measurements. Lines through the apex, the filler cone or a cone corner
/// are excluded; lines missing the unfolded region are measured as zero.
pub fn assemble_sinogram<O>(
    u: &DihedralUnfolding,
    oracle: O,
    geometry: SinogramGeometry,
) -> Result<Sinogram>
where
    O: Fn(&BrokenRay) -> Result<f64> + Sync,
{
    let cells: Vec<Result<(f64, CellMask, bool)>> = (0..geometry.len())
        .into_par_iter()
        .map(|c| {
            let line = geometry.line(c / geometry.n_offsets, c % geometry.n_offsets);
            match u.fold_line_chords(&line) {
                Ok(chords) => {
                    let mut v = 0.0;
                    for ch in &chords {
                        v += oracle(&ch.ray)?;
                    }
                    Ok((v, CellMask::Measured, true))
                }
                Err(Error::ApexLine | Error::FillerConeHit | Error::TipHit { .. }) => {
                    Ok((f64::NAN, CellMask::Excluded, false))
                }
                Err(Error::EmptyIntersection) => Ok((0.0, CellMask::Measured, false)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut values = Vec::with_capacity(cells.len());
    let mut mask = Vec::with_capacity(cells.len());
    let mut hits = 0usize;
    for c in cells {
        let (v, m, hit) = c?;
        values.push(v);
        mask.push(m);
        hits += hit as usize;
    }
    if hits == 0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(Sinogram {
        geometry,
        values,
        mask,
    })
}

/// Direct Radon sinogram of a planar field.
pub fn radon_sinogram<F: Field2D + ?Sized>(
    f: &F,
    geometry: SinogramGeometry,
    quad: &Quadrature,
) -> Result<Sinogram> {
    let vals: Result<Vec<f64>> = (0..geometry.len())
        .into_par_iter()
        .map(|c| {
            radon_forward(
                f,
                &geometry.line(c / geometry.n_offsets, c % geometry.n_offsets),
                quad,
            )
        })
        .collect();
    Ok(Sinogram {
        geometry,
        values: vals?,
        mask: vec![CellMask::Measured; geometry.len()],
    })
}
