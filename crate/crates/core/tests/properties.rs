use std::f64::consts::PI;

use brt_core::fields::{
    integrate_segment, AnalyticField, Expr, Field2D, GridSpec, Quadrature, Weight,
    REFINEMENT_TOLERANCE,
};
use brt_core::inversion::{fbp_reconstruct, torus_fourier_inversion, FbpOptions};
use brt_core::phantoms::{make_phantom, PhantomSpec, SymmetryClass};
use brt_core::planar::{BoundaryRadius, ConeDomain, RectTube};
use brt_core::transforms::{
    brt_forward, radon_forward, radon_sinogram, torus_geodesic_integral, AttenuationSpec,
    SinogramGeometry, TorusField, TorusTerm,
};
use brt_core::unfolding::{cube_fold_point, DihedralUnfolding};
use brt_core::{Line, Rect, Vec2};
use proptest::prelude::*;

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

fn unit_cone(alpha: f64) -> ConeDomain {
    ConeDomain::new(alpha, BoundaryRadius::constant(1.0)).unwrap()
}

fn point() -> impl Strategy<Value = Vec2> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn alpha() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(PI),
        Just(PI / 2.0),
        Just(PI / 3.0),
        Just(PI / 4.0),
        Just(2.0 * PI / 3.0),
        Just(0.4 * PI)
    ]
}

/// A ray traced from the arc of the unit cone, or `None` near a corner.
fn traced(alpha: f64, u: f64, turn: f64) -> Option<brt_core::planar::BrokenRay> {
    let cone = unit_cone(alpha);
    let p = cone.boundary_point((0.01 + 0.98 * u) * alpha);
    cone.trace(p, (-p).normalized().rotate(turn), 64).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn segment_integrals_are_additive(a in point(), b in point(), s in 0.1..0.9f64, h in -2.0..0.0f64) {
        let f = gaussian(Vec2::new(0.1, -0.2), 0.3);
        let quad = Quadrature::new(256.0);
        let m = a + (b - a) * s;
        let w = |offset| Weight::Exponential { h, offset };
        let whole = integrate_segment(&f, a, b, w(0.0), &quad).unwrap();
        let parts = integrate_segment(&f, a, m, w(0.0), &quad).unwrap()
            + integrate_segment(&f, m, b, w(a.dist(m)), &quad).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9, "{} vs {}", whole, parts);
    }

    #[test]
    fn unit_field_integrates_to_length(a in point(), b in point()) {
        let one = AnalyticField::constant(1.0, Rect::centered(Vec2::ZERO, 2.0));
        let v = integrate_segment(&one, a, b, Weight::Unit, &Quadrature::default()).unwrap();
        prop_assert!((v - a.dist(b)).abs() < 1e-12);
    }

    #[test]
    fn refining_the_quadrature_changes_little(a in point(), b in point()) {
        let f = gaussian(Vec2::new(0.2, 0.1), 0.08);
        let q = Quadrature::default();
        let coarse = integrate_segment(&f, a, b, Weight::Unit, &q).unwrap();
        let fine = integrate_segment(&f, a, b, Weight::Unit, &q.refined(2.0)).unwrap();
        prop_assert!((coarse - fine).abs() < REFINEMENT_TOLERANCE, "{}", (coarse - fine).abs());
    }

    #[test]
    fn reflections_preserve_speed_components(alpha in alpha(), u in 0.0..1.0f64, turn in -1.4..1.4f64) {
        let cone = unit_cone(alpha);
        if let Some(ray) = traced(alpha, u, turn) {
            for (p, din, dout) in ray.turns() {
                let n = cone.edge_normal_at(p);
                let t = n.perp();
                prop_assert!((din.dot(t).abs() - dout.dot(t).abs()).abs() < 1e-10);
                prop_assert!((din.dot(n) + dout.dot(n)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tracing_backwards_retraces_the_ray(alpha in alpha(), u in 0.0..1.0f64, turn in -1.4..1.4f64) {
        let cone = unit_cone(alpha);
        if let Some(ray) = traced(alpha, u, turn) {
            let back = cone.trace(ray.end(), -ray.exit_direction(), 64).unwrap();
            let rev = ray.reversed();
            prop_assert_eq!(back.vertices().len(), rev.vertices().len());
            for (p, q) in back.vertices().iter().zip(rev.vertices()) {
                prop_assert!(p.dist(*q) < 1e-9);
            }
        }
    }

    #[test]
    fn tube_rays_keep_their_axial_speed(x in 0.01..0.99f64, tilt in -1.2..1.2f64) {
        let tube = RectTube::new(1.0, 3.0).unwrap();
        let d = Vec2::from_polar(1.0, PI / 2.0 - tilt);
        if let Ok(ray) = tube.trace(Vec2::new(x, 0.0), d, 64) {
            for (a, b) in ray.segments() {
                prop_assert!(((b - a).normalized().y - d.y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unfolding_matches_pointwise(alpha in alpha(), u in 0.0..1.0f64, turn in -1.4..1.4f64) {
        let un = DihedralUnfolding::new(unit_cone(alpha));
        let f = gaussian(Vec2::from_polar(0.5, 0.5 * alpha), 0.15);
        let folded = un.fold_field(&f);
        if let Some(ray) = traced(alpha, u, turn) {
            if let Ok(sector) = un.canonical_sector(&ray) {
                let line = un.unfold_broken_ray(&ray, sector).unwrap();
                prop_assert!((line.length - ray.length()).abs() < 1e-9);
                let mut travelled = 0.0;
                for (a, b) in ray.segments() {
                    let len = a.dist(b);
                    // piece ends are sampled as one-sided limits, as in the quadrature
                    for k in 0..=8 {
                        let s = 1e-9 + (len - 2e-9) * k as f64 / 8.0;
                        let x = a + (b - a).normalized() * s;
                        let y = line.start + line.direction * (travelled + s);
                        prop_assert!((f.eval(x) - folded.eval(y)).abs() < 1e-9);
                    }
                    travelled += len;
                }
            }
        }
    }

    #[test]
    fn integer_cones_tile_the_disk(m in 1u32..6, r in 0.01..0.99f64, th in 0.0..std::f64::consts::TAU) {
        let un = DihedralUnfolding::new(ConeDomain::integer(m, 1.0).unwrap());
        let x = Vec2::from_polar(r, th);
        let (s, y) = un.fold_point(x).unwrap();
        prop_assert!(un.cone().contains(y) || y.y.abs() < 1e-12 || (y.angle() - PI / m as f64).abs() < 1e-12);
        prop_assert!(un.section(s, y).dist(x) < 1e-12);
    }

    #[test]
    fn folded_torus_geodesics_have_period_one(k in prop::collection::vec(-3i64..=3, 3), x0 in prop::collection::vec(0.0..2.0f64, 3), t in 0.0..1.0f64) {
        let at = |t: f64| cube_fold_point(&(0..3).map(|i| x0[i] + 2.0 * k[i] as f64 * t).collect::<Vec<_>>());
        let (a, b) = (at(t), at(t + 1.0));
        for i in 0..3 {
            prop_assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn broken_ray_transform_equals_radon_transform(alpha in alpha(), s in -1.0..1.0f64, phi in 0.0..std::f64::consts::TAU) {
        let un = DihedralUnfolding::new(unit_cone(alpha));
        let f = gaussian(Vec2::from_polar(0.6, 0.4 * alpha), 0.1);
        let quad = Quadrature::default();
        let line = Line::new(s, phi);
        if let Ok(chords) = un.fold_line_chords(&line) {
            let brt: f64 = chords.iter().map(|c| brt_forward(&f, &c.ray, AttenuationSpec::none(), &quad).unwrap()).sum();
            let radon = radon_forward(&un.fold_field(&f), &line, &quad).unwrap();
            prop_assert!((brt - radon).abs() < 1e-7 * (1.0 + radon.abs()));
        }
    }

    #[test]
    fn dihedral_images_of_a_line_see_the_same_data(m in 1u32..5, s in 0.05..0.95f64, phi in 0.0..std::f64::consts::TAU) {
        let un = DihedralUnfolding::new(ConeDomain::integer(m, 1.0).unwrap());
        let f = gaussian(Vec2::from_polar(0.55, 0.3 * PI / m as f64), 0.1);
        let folded = un.fold_field(&f);
        let quad = Quadrature::new(128.0);
        let base = radon_forward(&folded, &Line::new(s, phi), &quad).unwrap();
        let a = PI / m as f64;
        for j in 0..m {
            for sign in [1.0, -1.0] {
                let image = Line::new(s, sign * phi + 2.0 * j as f64 * a);
                let v = radon_forward(&folded, &image, &quad).unwrap();
                prop_assert!((v - base).abs() < 1e-9, "{} vs {}", v, base);
            }
        }
    }

    #[test]
    fn torus_integrals_do_not_depend_on_the_base_point(t in 0.0..1.0f64, x in 0.0..2.0f64, y in 0.0..2.0f64) {
        let f = |p: &[f64]| (PI * (p[0] + 2.0 * p[1])).cos() + 0.3 * (PI * 3.0 * p[0]).sin() * (PI * p[1]).cos();
        let k = [2i64, -1];
        let a = torus_geodesic_integral(f, &k, &[x, y], 128).unwrap();
        let shifted = [x + 2.0 * t * k[0] as f64, y + 2.0 * t * k[1] as f64];
        let b = torus_geodesic_integral(f, &k, &shifted, 128).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn filtered_backprojection_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let geo = SinogramGeometry::new(32, 33, 1.0).unwrap();
        let quad = Quadrature::default();
        let s1 = radon_sinogram(&gaussian(Vec2::new(0.2, 0.1), 0.15), geo, &quad).unwrap();
        let s2 = radon_sinogram(&gaussian(Vec2::new(-0.3, 0.2), 0.1), geo, &quad).unwrap();
        let grid = GridSpec::new(16, 16, Vec2::new(-0.8, -0.8), 0.1);
        let opts = FbpOptions::default();
        let r1 = fbp_reconstruct(&s1, grid, opts).unwrap();
        let r2 = fbp_reconstruct(&s2, grid, opts).unwrap();
        let r = fbp_reconstruct(&s1.combine(a, &s2, b).unwrap(), grid, opts).unwrap();
        for i in 0..grid.len() {
            let want = a * r1.values[i] + b * r2.values[i];
            prop_assert!((r.values[i] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn fourier_inversion_recovers_band_limited_fields(c in prop::collection::vec(-1.0..1.0f64, 6), band in 1u32..=3) {
        let b = band as i64;
        let terms = vec![
            TorusTerm::Cos { m: vec![0, 0], amplitude: c[0] },
            TorusTerm::Cos { m: vec![b, -1], amplitude: c[1] },
            TorusTerm::Sin { m: vec![1, b], amplitude: c[2] },
            TorusTerm::Cos { m: vec![-b, b], amplitude: c[3] },
            TorusTerm::Sin { m: vec![0, b], amplitude: c[4] },
            TorusTerm::CosProduct { m: vec![b, 1], amplitude: c[5] },
        ];
        let f = TorusField::new(2, terms).unwrap();
        let table = torus_fourier_inversion(2, |k, x0| torus_geodesic_integral(|x| f.eval(x), k, x0, 128), band).unwrap();
        for p in [[0.1, 0.2], [0.77, 1.3], [1.9, 0.4]] {
            prop_assert!((table.eval(&p) - f.eval(&p)).abs() < 1e-8);
        }
    }

    #[test]
    fn registry_phantoms_satisfy_their_fold_maps(band in 1u32..=6, degree in 1usize..=4) {
        let cases = [
            PhantomSpec::torus("torus-folded-band", 2, band, SymmetryClass::FoldOfTorusField),
            PhantomSpec::torus("torus-separable", 3, band.min(4), SymmetryClass::NOddAtBoundary),
            PhantomSpec::sphere("sphere-even-band", 2 * degree, SymmetryClass::EvenSpherical),
        ];
        for spec in cases {
            let p = make_phantom(&spec).unwrap();
            prop_assert!(p.symmetry_residual < 1e-9);
        }
    }
}
