//! Unfolding maps: dihedral copies of planar cones, the cube folded from the
//! torus of period 2, and the spherical octant folded from the sphere.

mod cube;
mod dihedral;
mod octant;

pub use cube::{
    cube_fold_coord, cube_fold_point, torus_geodesic_to_cube_orbit, CubeOrbit, FACE_TOL,
};
pub use dihedral::{
    DihedralUnfolding, Filler, FoldedChord, FoldedField, UnfoldedRay, UnfoldingDescription,
    FILLER_RADIUS_FACTOR,
};
pub use octant::{
    circle_basis, cross3, dot3, norm3, normalize3, octant_fold_point, OctantOrbit, Vec3,
};
