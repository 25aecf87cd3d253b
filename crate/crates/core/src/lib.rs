//! Broken ray transforms on planar cones, tubes and disks, their reduction
//! to straight-line, torus and great-circle integrals by unfolding
//! reflections, and the matching reconstruction methods.

pub mod error;
pub mod fields;
pub mod geom;
pub mod inversion;
pub mod nullspace;
pub mod phantoms;
pub mod planar;
pub mod reduce;
pub mod transforms;
pub mod unfolding;

pub use error::{Error, Result};
pub use geom::{Line, Rect, Vec2};
