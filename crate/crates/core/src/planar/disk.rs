use std::f64::consts::TAU;

use super::BrokenRay;
use crate::error::{Error, Result};
use crate::geom::Vec2;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Closed star-polygon orbit in the unit disk with vertices at angles
/// `phase + 2πjp/q`.
pub fn disk_star_orbit(q: u32, p: u32, phase: f64) -> Result<BrokenRay> {
    if q < 2 || p == 0 || p >= q {
        return Err(Error::InvalidOrbit(format!(
            "need q ≥ 2 and 0 < p < q, got p = {p}, q = {q}"
        )));
    }
    if gcd(p as u64, q as u64) != 1 {
        return Err(Error::InvalidOrbit(format!("gcd({p}, {q}) ≠ 1")));
    }
    let verts = (0..q)
        .map(|j| {
            Vec2::from_polar(
                1.0,
                phase + TAU * (j as u64 * p as u64 % q as u64) as f64 / q as f64,
            )
        })
        .collect();
    Ok(BrokenRay::closed(verts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial(p: Vec2) -> Vec2 {
        p.normalized()
    }

    #[test]
    fn diameter_orbit() {
        let o = disk_star_orbit(2, 1, 0.7).unwrap();
        assert_eq!(o.reflections(), 2);
        assert!(o.vertices()[1].dist(-Vec2::from_polar(1.0, 0.7)) < 1e-15);
        assert!((o.length() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn equilateral_triangle() {
        let o = disk_star_orbit(3, 1, 0.0).unwrap();
        for (a, b) in o.segments() {
            assert!((a.dist(b) - 3f64.sqrt()).abs() < 1e-14);
        }
        assert!(o.reflection_residual(radial) < 1e-12);
    }

    #[test]
    fn pentagram_chords_subtend_four_fifths_pi() {
        let o = disk_star_orbit(5, 2, 0.3).unwrap();
        let chord = 2.0 * (2.0 * std::f64::consts::PI / 5.0).sin();
        for (a, b) in o.segments() {
            assert!((a.dist(b) - chord).abs() < 1e-14);
        }
        assert!(o.reflection_residual(radial) < 1e-12);
    }

    #[test]
    fn non_coprime_is_rejected() {
        assert!(matches!(
            disk_star_orbit(6, 2, 0.0),
            Err(Error::InvalidOrbit(_))
        ));
        assert!(matches!(
            disk_star_orbit(1, 1, 0.0),
            Err(Error::InvalidOrbit(_))
        ));
    }
}
