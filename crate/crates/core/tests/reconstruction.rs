use std::f64::consts::PI;

use brt_core::fields::{AnalyticField, Expr, Field2D, GridSpec, Quadrature};
use brt_core::inversion::{
    reconstruct_cone_general, reconstruct_cone_integer, relative_l2_error, CglsParams, FbpOptions,
};
use brt_core::planar::{BoundaryRadius, ConeDomain};
use brt_core::transforms::{
    assemble_sinogram, brt_forward, AttenuationSpec, Sinogram, SinogramGeometry,
};
use brt_core::unfolding::DihedralUnfolding;
use brt_core::{Error, Rect, Vec2};

fn gaussian(center: Vec2, sigma: f64) -> AnalyticField {
    AnalyticField::new(
        Expr::Gaussian {
            center,
            sigma,
            amplitude: 1.0,
        },
        Rect::centered(center, 8.0 * sigma),
    )
}

fn grid_over(cone: &ConeDomain, n: usize) -> GridSpec {
    let bb = cone.bounding_box();
    let side = (bb.max.x - bb.min.x).max(bb.max.y - bb.min.y);
    GridSpec::new(n, n, bb.min, side / (n - 1) as f64)
}

fn sinogram(u: &DihedralUnfolding, f: &dyn Field2D, angles: usize, offsets: usize) -> Sinogram {
    let geo = SinogramGeometry::new(angles, offsets, 1.05 * u.cone().max_h()).unwrap();
    let quad = Quadrature::new(64.0);
    assemble_sinogram(
        u,
        |r| brt_forward(f, r, AttenuationSpec::none(), &quad),
        geo,
    )
    .unwrap()
}

#[test]
fn filtered_backprojection_on_integer_cones() {
    for m in [1u32, 2, 3] {
        let cone = ConeDomain::integer(m, 1.0).unwrap();
        let u = DihedralUnfolding::new(cone.clone());
        let f = gaussian(Vec2::from_polar(0.6, 0.5 * PI / m as f64), 0.08);
        let sino = sinogram(&u, &f, 360, 257);
        let rec = reconstruct_cone_integer(&u, &sino, grid_over(&cone, 256), FbpOptions::default())
            .unwrap();
        let err = relative_l2_error(&rec.field, &f, |p| cone.contains(p));
        assert!(err < 0.03, "m = {m}: relative error {err}");
        assert!(
            rec.sector_consistency < 3.0 * err,
            "m = {m}: {} vs {err}",
            rec.sector_consistency
        );
    }
}

#[test]
fn filtered_backprojection_rejects_general_angles() {
    let cone = ConeDomain::new(2.0 * PI / 3.0, BoundaryRadius::constant(1.0)).unwrap();
    let u = DihedralUnfolding::new(cone.clone());
    let sino = sinogram(&u, &gaussian(Vec2::new(0.3, 0.4), 0.08), 16, 17);
    let err = reconstruct_cone_integer(&u, &sino, grid_over(&cone, 16), FbpOptions::default())
        .unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)));
}

#[test]
fn cgls_agrees_with_filtered_backprojection_on_a_half_disk() {
    let cone = ConeDomain::integer(2, 1.0).unwrap();
    let u = DihedralUnfolding::new(cone.clone());
    let f = gaussian(Vec2::from_polar(0.6, PI / 4.0), 0.1);
    let sino = sinogram(&u, &f, 120, 129);
    let grid = grid_over(&cone, 64);
    let fbp = reconstruct_cone_integer(&u, &sino, grid, FbpOptions::default()).unwrap();
    let cg = reconstruct_cone_general(&u, &sino, grid, &CglsParams::default()).unwrap();
    let e_fbp = relative_l2_error(&fbp.field, &f, |p| cone.contains(p));
    let e_cg = relative_l2_error(&cg.field, &f, |p| cone.contains(p));
    assert!(e_fbp < 0.05 && e_cg < 0.05, "fbp {e_fbp}, cgls {e_cg}");
    assert!(cg
        .residuals
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn cgls_on_a_general_cone() {
    let cone = ConeDomain::new(2.0 * PI / 3.0, BoundaryRadius::constant(1.0)).unwrap();
    let u = DihedralUnfolding::new(cone.clone());
    let f = gaussian(Vec2::from_polar(0.7, PI / 3.0), 0.1);
    let sino = sinogram(&u, &f, 180, 129);
    let params = CglsParams {
        apex_margin: 0.4,
        shadow_margin: 0.1,
        max_iterations: 300,
        ..Default::default()
    };
    let rec = reconstruct_cone_general(&u, &sino, grid_over(&cone, 64), &params).unwrap();
    let err = relative_l2_error(&rec.field, &f, |p| cone.contains(p));
    assert!(err < 0.15, "relative error {err}");
    assert!(rec
        .residuals
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert!(rec.condition_estimate.is_some_and(|c| c > 1.0));
    // excluded unknowns stay at zero
    assert_eq!(rec.field.at(0, 0), 0.0);
}

#[test]
fn cgls_rejects_negative_margins() {
    let cone = ConeDomain::new(2.0 * PI / 3.0, BoundaryRadius::constant(1.0)).unwrap();
    let u = DihedralUnfolding::new(cone.clone());
    let sino = sinogram(&u, &gaussian(Vec2::new(0.3, 0.4), 0.08), 16, 17);
    let params = CglsParams {
        apex_margin: -0.1,
        ..Default::default()
    };
    assert!(reconstruct_cone_general(&u, &sino, grid_over(&cone, 16), &params).is_err());
}
