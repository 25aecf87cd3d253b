//! Scalar fields on the plane, radial profiles, and the quadrature used by
//! every transform.

mod analytic;
mod grid;
pub mod io;
mod profile;
mod quadrature;

pub use analytic::{AnalyticField, Expr, Trig};
pub use grid::{GridField, GridSpec};
pub use profile::{ProfileKind, RadialProfile};
pub use quadrature::{
    integrate_segment, simpson, trapezoid_periodic, Quadrature, Weight, REFINEMENT_TOLERANCE,
};

use serde::{Deserialize, Serialize};

use crate::geom::{Rect, Vec2};

/// A real field on the plane that vanishes outside its support box.
pub trait Field2D: Send + Sync {
    fn eval(&self, p: Vec2) -> f64;

    fn support(&self) -> Rect;

    /// Appends the arclength parameters in `(0, len)` along `p + t·u` where
    /// the field is not smooth. Quadrature splits at these points.
    fn breakpoints(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        self.support().crossings(p, u, len, out);
    }
}

impl<F: Field2D + ?Sized> Field2D for &F {
    fn eval(&self, p: Vec2) -> f64 {
        (**self).eval(p)
    }
    fn support(&self) -> Rect {
        (**self).support()
    }
    fn breakpoints(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        (**self).breakpoints(p, u, len, out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField2D {
    Grid(GridField),
    Analytic(AnalyticField),
}

impl Field2D for ScalarField2D {
    fn eval(&self, p: Vec2) -> f64 {
        match self {
            ScalarField2D::Grid(g) => g.eval(p),
            ScalarField2D::Analytic(a) => a.eval(p),
        }
    }

    fn support(&self) -> Rect {
        match self {
            ScalarField2D::Grid(g) => g.support(),
            ScalarField2D::Analytic(a) => a.support(),
        }
    }

    fn breakpoints(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        match self {
            ScalarField2D::Grid(g) => g.breakpoints(p, u, len, out),
            ScalarField2D::Analytic(a) => a.breakpoints(p, u, len, out),
        }
    }
}

impl From<GridField> for ScalarField2D {
    fn from(g: GridField) -> Self {
        ScalarField2D::Grid(g)
    }
}

impl From<AnalyticField> for ScalarField2D {
    fn from(a: AnalyticField) -> Self {
        ScalarField2D::Analytic(a)
    }
}
