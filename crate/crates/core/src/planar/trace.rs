use super::BrokenRay;
use crate::error::{Error, Result};
use crate::geom::{point_segment_distance, Vec2};

/// Below this `|d·n|` a hit counts as tangential.
pub const TANGENT_TOL: f64 = 1e-12;

/// Specular reflection `d − 2(d·n)n`.
pub fn reflect_direction(d: Vec2, n: Vec2) -> Result<Vec2> {
    let dn = d.dot(n);
    if dn.abs() < TANGENT_TOL {
        return Err(Error::TangentialHit(dn.abs()));
    }
    Ok(d - n * (2.0 * dn))
}

/// Next boundary event along a straight segment.
#[derive(Debug, Clone, Copy)]
pub enum Hit {
    /// Reflection at parameter `t`; `point` is the hit snapped onto the wall.
    Reflect {
        t: f64,
        point: Vec2,
        normal: Vec2,
    },
    Exit {
        t: f64,
        point: Vec2,
    },
}

/// A planar table with reflecting walls and a measurement boundary.
pub trait Billiard {
    fn next_hit(&self, p: Vec2, d: Vec2) -> Result<Hit>;

    /// Corner set; rays may not pass within `tip_tolerance` of these.
    fn corners(&self) -> Vec<Vec2>;

    fn tip_tolerance(&self) -> f64;

    fn validate_start(&self, start: Vec2, dir: Vec2) -> Result<()>;
}

pub fn trace<B: Billiard + ?Sized>(
    table: &B,
    start: Vec2,
    dir: Vec2,
    max_reflections: usize,
) -> Result<BrokenRay> {
    let norm = dir.norm();
    if !(norm > 0.0) || !dir.is_finite() || !start.is_finite() {
        return Err(Error::InvalidStart(
            "direction must be a finite non-zero vector".into(),
        ));
    }
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidStart(format!(
            "direction must be a unit vector, |d| = {norm}"
        )));
    }
    let dir = dir * (1.0 / norm);
    table.validate_start(start, dir)?;
    let corners = table.corners();
    let eps = table.tip_tolerance();

    let mut vertices = vec![start];
    let mut p = start;
    let mut d = dir;
    loop {
        let hit = table.next_hit(p, d)?;
        let q = match hit {
            Hit::Reflect { point, .. } | Hit::Exit { point, .. } => point,
        };
        if let Some(c) = corners
            .iter()
            .find(|&&c| point_segment_distance(c, p, q) < eps)
        {
            return Err(Error::TipHit { x: c.x, y: c.y });
        }
        vertices.push(q);
        match hit {
            Hit::Exit { .. } => return Ok(BrokenRay::open(vertices)),
            Hit::Reflect { normal, .. } => {
                if vertices.len() - 1 > max_reflections {
                    return Err(Error::MaxReflectionsExceeded(max_reflections));
                }
                d = reflect_direction(d, normal)?;
                p = q;
            }
        }
    }
}
