use std::f64::consts::PI;

use brt_core::inversion::{reconstruct_cube_periodic, reconstruct_octant_periodic};
use brt_core::phantoms::{make_phantom, PhantomSpec, SymmetryClass};
use brt_core::transforms::sphere::{funk_eigenvalue, real_harmonic};
use brt_core::transforms::{
    exact_torus_nodes, great_circle_integral, periodic_brt_cube, periodic_brt_octant,
    torus_geodesic_integral,
};
use brt_core::unfolding::{normalize3, octant_fold_point, torus_geodesic_to_cube_orbit};
use brt_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn torus_geodesic_integrals_of_plane_waves() {
    // ∫ cos(π m·x) over the closed geodesic is 2|k|·cos(π m·x0) when m ⊥ k and 0 otherwise
    let x0 = [0.31, 0.77, 0.12];
    for (m, k) in [
        ([2, -1, 0], [1, 2, 0]),
        ([1, 1, 1], [1, -1, 0]),
        ([3, 0, 1], [0, 1, 0]),
        ([2, 1, 0], [1, 0, 1]),
    ] {
        let got = torus_geodesic_integral(
            |x| (PI * (0..3).map(|i| m[i] as f64 * x[i]).sum::<f64>()).cos(),
            &k,
            &x0,
            256,
        )
        .unwrap();
        let dot: i64 = (0..3).map(|i| m[i] * k[i]).sum();
        let len = 2.0 * ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        let want = if dot == 0 {
            len * (PI * (0..3).map(|i| m[i] as f64 * x0[i]).sum::<f64>()).cos()
        } else {
            0.0
        };
        assert!(
            (got - want).abs() < 1e-12,
            "m = {m:?}, k = {k:?}: {got} vs {want}"
        );
    }
}

fn cube_round_trip(spec: &PhantomSpec, points: usize) -> f64 {
    let p = make_phantom(spec).unwrap();
    let f = p.torus().unwrap();
    let nodes = exact_torus_nodes(f.dim, f.band());
    let rec = reconstruct_cube_periodic(
        f.dim,
        |o| periodic_brt_cube(|x| f.eval(x), o, nodes),
        f.band(),
        points,
    )
    .unwrap();
    rec.values
        .iter()
        .enumerate()
        .map(|(i, v)| (v - f.eval(&rec.node(i))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn square_reconstruction_from_folded_orbits() {
    let spec = PhantomSpec::torus("torus-folded-band", 2, 4, SymmetryClass::FoldOfTorusField);
    let err = cube_round_trip(&spec, 17);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn cube_reconstruction_of_a_separable_field() {
    let spec = PhantomSpec::torus("torus-separable", 3, 2, SymmetryClass::NOddAtBoundary);
    let err = cube_round_trip(&spec, 7);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn cube_orbits_have_the_torus_length() {
    let o = torus_geodesic_to_cube_orbit(&[2, -1, 3], &[0.2, 0.45, 0.61]).unwrap();
    let polyline: f64 = o
        .vertices
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    assert!((polyline - 2.0 * 14f64.sqrt()).abs() < 1e-12);
    assert_eq!(
        torus_geodesic_to_cube_orbit(&[0, 1], &[1.0, 0.3]),
        Err(Error::DegenerateOrbit)
    );
}

#[test]
fn funk_eigenvalues_from_zonal_harmonics() {
    // Y_l0 restricted to the equator is Y_l0(e_z)·P_l(0), so the equator integral over Y_l0(e_z) is 2πP_l(0)
    for l in 0..=12 {
        let pole = real_harmonic(l, 0, [0.0, 0.0, 1.0]);
        let integral =
            great_circle_integral(|x| real_harmonic(l, 0, x), [0.0, 0.0, 1.0], 64).unwrap();
        assert!(
            (integral / pole - funk_eigenvalue(l)).abs() < 1e-12,
            "l = {l}"
        );
    }
}

#[test]
fn octant_reconstruction_of_an_even_field() {
    let p = make_phantom(&PhantomSpec::sphere(
        "sphere-even-band",
        6,
        SymmetryClass::EvenSpherical,
    ))
    .unwrap();
    let f = p.sphere().unwrap();
    let rec =
        reconstruct_octant_periodic(|o| periodic_brt_octant(|x| f.eval(x), o, 256), 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let x = octant_fold_point(normalize3([
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ]));
        assert!((rec.eval(x) - f.eval(x)).abs() < 1e-5);
    }
}

#[test]
fn odd_extension_is_rejected() {
    let spec = PhantomSpec::sphere("sphere-odd-extended", 6, SymmetryClass::None);
    let p = make_phantom(&spec).unwrap();
    let f = p.sphere().unwrap();
    let err =
        reconstruct_octant_periodic(|o| great_circle_integral(|x| f.eval(x), o.normal, 256), 6)
            .unwrap_err();
    assert!(matches!(err, Error::NonEvenData { .. }), "{err:?}");
}
