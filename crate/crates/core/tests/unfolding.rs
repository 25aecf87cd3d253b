use std::f64::consts::{PI, TAU};

use brt_core::fields::{AnalyticField, Expr, Quadrature};
use brt_core::planar::{BoundaryRadius, BrokenRay, ConeDomain};
use brt_core::transforms::{brt_forward, radon_forward, AttenuationSpec};
use brt_core::unfolding::DihedralUnfolding;
use brt_core::{Error, Line, Rect, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_cone(alpha: f64) -> ConeDomain {
    ConeDomain::new(alpha, BoundaryRadius::constant(1.0)).unwrap()
}

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

/// Images of `c` under the dihedral group generated by the edges of the cone `π/m`.
fn dihedral_images(c: Vec2, m: u32) -> Vec<Vec2> {
    let alpha = PI / m as f64;
    let mirrored = Vec2::new(c.x, -c.y);
    (0..m)
        .flat_map(|j| {
            [
                c.rotate(2.0 * j as f64 * alpha),
                mirrored.rotate(2.0 * j as f64 * alpha),
            ]
        })
        .collect()
}

fn line_gaussian_integral(c: Vec2, sigma: f64, line: &Line) -> f64 {
    let d = c.dot(line.normal()) - line.offset;
    sigma * TAU.sqrt() * (-d * d / (2.0 * sigma * sigma)).exp()
}

fn random_line(rng: &mut ChaCha8Rng, s_max: f64) -> Line {
    Line::new(rng.gen_range(-s_max..s_max), rng.gen_range(0.0..TAU))
}

#[test]
fn broken_ray_integrals_match_the_image_sum() {
    // independent oracle: the unfolded field is a sum of mirrored gaussians
    let (c, sigma) = (Vec2::new(0.45, 0.35), 0.04);
    let f = gaussian(c, sigma);
    let quad = Quadrature::new(256.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [2u32, 3] {
        let c = if m == 3 {
            Vec2::from_polar(0.6, PI / 6.0)
        } else {
            c
        };
        let f = if m == 3 {
            gaussian(c, sigma)
        } else {
            f.clone()
        };
        let u = DihedralUnfolding::new(ConeDomain::integer(m, 1.0).unwrap());
        let images = dihedral_images(c, m);
        let mut checked = 0;
        while checked < 60 {
            let line = random_line(&mut rng, 0.95);
            let Ok(chords) = u.fold_line_chords(&line) else {
                continue;
            };
            let got: f64 = chords
                .iter()
                .map(|ch| brt_forward(&f, &ch.ray, AttenuationSpec::none(), &quad).unwrap())
                .sum();
            let want: f64 = images
                .iter()
                .map(|&p| line_gaussian_integral(p, sigma, &line))
                .sum();
            assert!(
                (got - want).abs() < 1e-8,
                "m = {m}, line {line:?}: {got} vs {want}"
            );
            checked += 1;
        }
    }
}

#[test]
fn broken_ray_transform_equals_radon_of_folded_field() {
    let quad = Quadrature::new(64.0);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for alpha in [PI, PI / 2.0, PI / 3.0, 2.0 * PI / 3.0] {
        let cone = unit_cone(alpha);
        let u = DihedralUnfolding::new(cone.clone());
        let f = gaussian(Vec2::from_polar(0.6, 0.5 * alpha), 0.08);
        let folded = u.fold_field(&f);
        let mut checked = 0;
        while checked < 50 {
            let line = random_line(&mut rng, 1.05);
            let Ok(chords) = u.fold_line_chords(&line) else {
                continue;
            };
            let brt: f64 = chords
                .iter()
                .map(|ch| brt_forward(&f, &ch.ray, AttenuationSpec::none(), &quad).unwrap())
                .sum();
            let radon = radon_forward(&folded, &line, &quad).unwrap();
            assert!(
                (brt - radon).abs() < 1e-7 * (1.0 + radon.abs()),
                "α = {alpha}: {brt} vs {radon}"
            );
            checked += 1;
        }
    }
}

fn random_traced_ray(cone: &ConeDomain, rng: &mut ChaCha8Rng) -> Option<BrokenRay> {
    let theta = rng.gen_range(0.01..0.99) * cone.alpha();
    let p = cone.boundary_point(theta);
    let d = (-p).normalized().rotate(rng.gen_range(-1.4..1.4));
    cone.trace(p, d, 64).ok()
}

#[test]
fn folding_the_unfolded_line_recovers_the_traced_ray() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for alpha in [PI, PI / 2.0, PI / 3.0, PI / 5.0, 2.0 * PI / 3.0] {
        let cone = unit_cone(alpha);
        let u = DihedralUnfolding::new(cone.clone());
        let (mut checked, mut filler_lines) = (0, 0);
        while checked < 60 {
            let Some(ray) = random_traced_ray(&cone, &mut rng) else {
                continue;
            };
            let Ok(sector) = u.canonical_sector(&ray) else {
                continue;
            };
            let un = u.unfold_broken_ray(&ray, sector).unwrap();
            assert!(un.collinearity_residual() < 1e-9, "α = {alpha}");
            let line = un.line();
            let mid = line.param_of(un.start + un.direction * (0.5 * un.length));
            // the extended line may cross the filler outside the unfolded chord
            let chords = match u.fold_line_chords(&line) {
                Err(Error::FillerConeHit) if u.filler().is_some() => {
                    filler_lines += 1;
                    continue;
                }
                r => r.unwrap(),
            };
            let chord = chords
                .iter()
                .find(|c| c.t_start <= mid && mid <= c.t_end)
                .unwrap();
            let (a, b) = (chord.ray.vertices(), ray.vertices());
            assert_eq!(a.len(), b.len(), "α = {alpha}");
            for (p, q) in a.iter().zip(b) {
                assert!(p.dist(*q) < 1e-9, "α = {alpha}: {p:?} vs {q:?}");
            }
            checked += 1;
        }
        assert!(
            filler_lines < checked,
            "α = {alpha}: {filler_lines} rays skipped"
        );
    }
}

#[test]
fn apex_and_filler_lines_are_reported() {
    let u = DihedralUnfolding::new(unit_cone(2.0 * PI / 3.0));
    assert_eq!(
        u.fold_line_chords(&Line::new(0.0, 1.0)).unwrap_err(),
        Error::ApexLine
    );
    assert_eq!(
        u.fold_line_chords(&Line::new(0.3, 0.0)).unwrap_err(),
        Error::FillerConeHit
    );
    assert_eq!(
        u.fold_line_chords(&Line::new(2.0, 0.0)).unwrap_err(),
        Error::EmptyIntersection
    );
}

#[test]
fn ray_leaving_both_copies_has_no_canonical_sector() {
    // a bounce on θ = 0 leaves sector 0 downward and sector 1 into the filler
    let cone = unit_cone(2.0 * PI / 3.0);
    let u = DihedralUnfolding::new(cone.clone());
    let p = Vec2::from_polar(1.0, PI / 4.0);
    let ray = cone
        .trace(p, (Vec2::new(0.3265328730038057, 0.0) - p).normalized(), 8)
        .unwrap();
    assert_eq!(ray.reflections(), 1);
    assert_eq!(u.canonical_sector(&ray), Err(Error::FillerConeHit));
    let q = Vec2::from_polar(1.0, 0.5);
    let ray = cone
        .trace(q, Vec2::from_polar(1.0, 0.5 + PI - 0.3), 8)
        .unwrap();
    let sector = u.canonical_sector(&ray).unwrap();
    assert!(
        u.unfold_broken_ray(&ray, sector)
            .unwrap()
            .collinearity_residual()
            < 1e-12
    );
}
