//! Grid field file formats: CSV and 16-bit PGM with a JSON sidecar.
//!
//! CSV layout: the header line `nx,ny,ox,oy,spacing`, one line with those
//! values, then `ny` rows of `nx` comma separated samples (row `j` holds
//! nodes with `y = oy + j·spacing`).
//!
//! PGM rows run top to bottom, i.e. the first image row is the largest `y`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{GridField, GridSpec};
use crate::error::{Error, Result};
use crate::geom::Vec2;

pub const CSV_HEADER: &str = "nx,ny,ox,oy,spacing";

pub fn grid_to_csv(g: &GridField) -> String {
    let s = &g.spec;
    let mut out = String::with_capacity(g.values.len() * 20);
    out.push_str(CSV_HEADER);
    out.push('\n');
    let _ = writeln!(
        out,
        "{},{},{},{},{}",
        s.nx, s.ny, s.origin.x, s.origin.y, s.spacing
    );
    for row in g.values.chunks(s.nx) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn grid_from_csv(text: &str) -> Result<GridField> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty grid csv".into()))?;
    if header.trim() != CSV_HEADER {
        return Err(Error::Parse(format!(
            "line 1: expected header '{CSV_HEADER}'"
        )));
    }
    let (ln, meta) = lines
        .next()
        .ok_or_else(|| Error::Parse("missing grid metadata line".into()))?;
    let meta: Vec<&str> = meta.split(',').map(str::trim).collect();
    if meta.len() != 5 {
        return Err(Error::Parse(format!(
            "line {}: expected 5 metadata fields",
            ln + 1
        )));
    }
    let bad = |what: &str| Error::Parse(format!("line {}: invalid {what}", ln + 1));
    let nx: usize = meta[0].parse().map_err(|_| bad("nx"))?;
    let ny: usize = meta[1].parse().map_err(|_| bad("ny"))?;
    let ox: f64 = meta[2].parse().map_err(|_| bad("ox"))?;
    let oy: f64 = meta[3].parse().map_err(|_| bad("oy"))?;
    let spacing: f64 = meta[4].parse().map_err(|_| bad("spacing"))?;
    let mut values = Vec::with_capacity(nx * ny);
    for (ln, row) in lines {
        let before = values.len();
        for tok in row.split(',') {
            values.push(
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: invalid value '{tok}'", ln + 1)))?,
            );
        }
        if values.len() - before != nx {
            return Err(Error::Parse(format!(
                "line {}: expected {nx} values",
                ln + 1
            )));
        }
    }
    GridField::new(GridSpec::new(nx, ny, Vec2::new(ox, oy), spacing), values)
}

/// Scaling metadata stored next to a PGM image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgmSidecar {
    pub min: f64,
    pub max: f64,
    pub nx: usize,
    pub ny: usize,
    pub ox: f64,
    pub oy: f64,
    pub spacing: f64,
}

/// Encodes the grid as a binary 16-bit PGM and returns it with its sidecar.
pub fn grid_to_pgm(g: &GridField) -> (Vec<u8>, PgmSidecar) {
    let s = &g.spec;
    let min = g.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = g.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    let mut out = format!("P5\n{} {}\n65535\n", s.nx, s.ny).into_bytes();
    out.reserve(2 * g.values.len());
    for j in (0..s.ny).rev() {
        for i in 0..s.nx {
            let q = (((g.at(i, j) - min) / span) * 65535.0)
                .round()
                .clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    let side = PgmSidecar {
        min,
        max,
        nx: s.nx,
        ny: s.ny,
        ox: s.origin.x,
        oy: s.origin.y,
        spacing: s.spacing,
    };
    (out, side)
}

pub fn grid_from_pgm(bytes: &[u8], side: &PgmSidecar) -> Result<GridField> {
    // header: magic, width, height, maxval separated by single whitespace
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(Error::Parse("expected a 16-bit binary PGM".into()));
    }
    let nx: usize = fields[1]
        .parse()
        .map_err(|_| Error::Parse("bad PGM width".into()))?;
    let ny: usize = fields[2]
        .parse()
        .map_err(|_| Error::Parse("bad PGM height".into()))?;
    if nx != side.nx || ny != side.ny {
        return Err(Error::Parse("PGM size disagrees with sidecar".into()));
    }
    let data = bytes
        .get(pos..pos + 2 * nx * ny)
        .ok_or_else(|| Error::Parse("truncated PGM data".into()))?;
    let span = if side.max > side.min {
        side.max - side.min
    } else {
        1.0
    };
    let mut values = vec![0.0; nx * ny];
    for (k, px) in data.chunks_exact(2).enumerate() {
        let (row, i) = (k / nx, k % nx);
        let j = ny - 1 - row;
        let q = u16::from_be_bytes([px[0], px[1]]) as f64;
        values[j * nx + i] = side.min + q / 65535.0 * span;
    }
    GridField::new(
        GridSpec::new(nx, ny, Vec2::new(side.ox, side.oy), side.spacing),
        values,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(vals in proptest::collection::vec(-1e6f64..1e6, 12)) {
            let g = GridField::new(GridSpec::new(4, 3, Vec2::new(-0.25, 1.5), 0.125), vals).unwrap();
            prop_assert_eq!(grid_from_csv(&grid_to_csv(&g)).unwrap(), g);
        }

        #[test]
        fn pgm_round_trip_within_quantisation(vals in proptest::collection::vec(-3.0f64..5.0, 20)) {
            let g = GridField::new(GridSpec::new(5, 4, Vec2::ZERO, 0.5), vals).unwrap();
            let (bytes, side) = grid_to_pgm(&g);
            let back = grid_from_pgm(&bytes, &side).unwrap();
            let step = (side.max - side.min) / 65535.0;
            for (a, b) in g.values.iter().zip(&back.values) {
                prop_assert!((a - b).abs() <= step);
            }
        }
    }

    #[test]
    fn csv_reports_line_numbers() {
        let err = grid_from_csv("nx,ny,ox,oy,spacing\n2,2,0,0,1\n1,2\n3,x\n").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }
}
