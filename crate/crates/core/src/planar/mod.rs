//! Planar billiard tables with reflecting walls and broken-ray tracing.

mod cone;
mod disk;
mod ray;
mod trace;
mod tube;

#[allow(unused_imports)]
pub(crate) use cone::bisect;
pub use cone::{BoundaryRadius, ConeDomain};
pub use disk::{disk_star_orbit, gcd};
pub use ray::BrokenRay;
pub use trace::{reflect_direction, trace, Billiard, Hit, TANGENT_TOL};
pub use tube::RectTube;
