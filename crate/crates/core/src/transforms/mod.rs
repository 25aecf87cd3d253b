//! Forward operators: attenuated broken ray transform, Radon transform,
//! torus geodesic and great circle integrals, and sinogram assembly.

mod line;
mod sinogram;
pub mod sphere;
mod torus;

pub use line::{brt_forward, periodic_brt, radon_forward, AttenuationSpec};
pub use sinogram::{
    assemble_sinogram, radon_sinogram, CellMask, Sinogram, SinogramGeometry, SINOGRAM_CSV_HEADER,
};
pub use sphere::{great_circle_integral, periodic_brt_octant, SphereField};
pub use torus::{
    exact_torus_nodes, periodic_brt_cube, torus_data_csv, torus_geodesic_integral, TorusField,
    TorusSample, TorusTerm, DEFAULT_TORUS_NODES,
};
