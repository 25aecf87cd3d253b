use crate::fields::{Field2D, GridField};
use crate::geom::Vec2;
use crate::planar::ConeDomain;

/// `‖rec − truth‖₂ / ‖truth‖₂` over the grid nodes accepted by `inside`.
pub fn relative_l2_error<F, M>(rec: &GridField, truth: &F, inside: M) -> f64
where
    F: Field2D + ?Sized,
    M: Fn(Vec2) -> bool,
{
    let s = &rec.spec;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..s.ny {
        for i in 0..s.nx {
            let p = s.node(i, j);
            if inside(p) {
                let t = truth.eval(p);
                let d = rec.at(i, j) - t;
                num += d * d;
                den += t * t;
            }
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Largest absolute nodal difference.
pub fn max_abs_error<F: Field2D + ?Sized>(rec: &GridField, truth: &F) -> f64 {
    let s = &rec.spec;
    let mut m: f64 = 0.0;
    for j in 0..s.ny {
        for i in 0..s.nx {
            m = m.max((rec.at(i, j) - truth.eval(s.node(i, j))).abs());
        }
    }
    m
}

/// Closed cone membership, apex included.
pub fn in_closed_cone(cone: &ConeDomain, p: Vec2) -> bool {
    let r = p.norm();
    if r == 0.0 {
        return true;
    }
    let th = p.angle();
    let a = cone.alpha();
    let tol = 1e-12;
    (th <= a + tol || th >= std::f64::consts::TAU - tol) && r <= cone.h(th) * (1.0 + tol)
}
