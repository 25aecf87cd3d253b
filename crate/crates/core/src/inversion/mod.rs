//! Reconstruction: filtered backprojection with fold-back for cones of
//! angle `π/m`, least squares on measured lines for other angles, Fourier
//! inversion on the torus, and Funk inversion on the sphere.

mod cgls;
mod cone;
mod fbp;
mod funk;
mod metrics;
mod torus;

pub use cgls::{
    bilinear_segment, broken_ray_matrix, cgls, reconstruct_cone_general, siddon_segment, Basis,
    CglsOutcome, CglsParams, GeneralReconstruction, SparseMatrix, StopReason,
};
pub use cone::{reconstruct_cone_integer, ConeReconstruction};
pub use fbp::{fbp_reconstruct, FbpOptions, FilteredSinogram};
pub use funk::{
    funk_inversion, reconstruct_octant_periodic, FunkOutcome, HarmonicTable, OctantReconstruction,
};
pub use metrics::{in_closed_cone, max_abs_error, relative_l2_error};
pub use torus::{
    perpendicular_primitive, reconstruct_cube_periodic, torus_fourier_inversion,
    CubeReconstruction, FourierTable,
};
