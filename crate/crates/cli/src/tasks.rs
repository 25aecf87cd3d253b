//! One function per task. Each returns its artifacts without touching the
//! file system.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::sync::Mutex;

use brt_core::fields::io::{grid_to_csv, grid_to_pgm};
use brt_core::fields::{GridField, GridSpec, Quadrature, RadialProfile};
use brt_core::inversion::{
    reconstruct_cone_general, reconstruct_cone_integer, reconstruct_cube_periodic,
    reconstruct_octant_periodic, relative_l2_error, CglsParams, FbpOptions,
};
use brt_core::nullspace::{
    cylinder_identity_check, cylinder_injectivity_probe, disk_null_check, disk_positivity_witness,
    tube_null_check, TUBE_QUADRATURE,
};
use brt_core::phantoms::{make_phantom, Phantom};
use brt_core::planar::{disk_star_orbit, BoundaryRadius, BrokenRay, ConeDomain, RectTube};
use brt_core::transforms::sphere::SphereField;
use brt_core::transforms::{
    assemble_sinogram, brt_forward, periodic_brt_cube, periodic_brt_octant, radon_forward,
    torus_data_csv, AttenuationSpec, Sinogram, SinogramGeometry, TorusSample,
};
use brt_core::unfolding::{octant_fold_point, DihedralUnfolding};
use brt_core::{Line, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Geometry, Inversion, Scenario, Task};
use crate::{Artifacts, CliError};

/// Residual bound of the unfolding identity, relative to `1 + |value|`.
const IDENTITY_TOLERANCE: f64 = 1e-7;
const NULL_TOLERANCE: f64 = 1e-9;
const CYLINDER_TOLERANCE: f64 = 1e-10;

pub fn run(s: &Scenario, task: Task) -> Result<Artifacts, CliError> {
    let mut a = Artifacts::new();
    a.metric("scenario", s.name.clone());
    a.metric("task", task.name());
    a.metric("seed", s.seed);
    match task {
        Task::Trace => trace(s, &mut a)?,
        Task::Forward => forward(s, &mut a)?,
        Task::Sinogram => sinogram(s, &mut a).map(|_| ())?,
        Task::Reconstruct => reconstruct(s, &mut a)?,
        Task::PeriodicCube => periodic_cube(s, &mut a)?,
        Task::Octant => octant(s, &mut a)?,
        Task::NullCheck => null_check(s, &mut a)?,
        Task::AttProbe => att_probe(s, &mut a)?,
    }
    Ok(a)
}

fn config<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

fn cone(s: &Scenario) -> Result<ConeDomain, CliError> {
    let Geometry::Cone {
        m,
        opening_angle,
        radius,
        boundary,
    } = &s.geometry
    else {
        return config("this task needs a cone geometry");
    };
    let alpha = match (m, opening_angle) {
        (Some(m), None) if *m > 0 => PI / *m as f64,
        (None, Some(a)) => *a,
        _ => {
            return config("cone geometry needs exactly one of `m` (positive) and `opening_angle`")
        }
    };
    let boundary = match (radius, boundary) {
        (Some(r), None) => BoundaryRadius::constant(*r),
        (None, Some(b)) => b.clone(),
        (None, None) => BoundaryRadius::constant(1.0),
        _ => return config("cone geometry takes `radius` or `boundary`, not both"),
    };
    Ok(ConeDomain::new(alpha, boundary)?)
}

fn phantom(s: &Scenario) -> Result<Phantom, CliError> {
    let Some(spec) = &s.phantom else {
        return config("this task needs a [phantom] table");
    };
    Ok(make_phantom(spec)?)
}

fn planar_phantom(s: &Scenario) -> Result<(Phantom, brt_core::fields::ScalarField2D), CliError> {
    let p = phantom(s)?;
    let Some(f) = p.planar().cloned() else {
        return config(format!("phantom {:?} is not a planar field", p.spec.key));
    };
    Ok((p, f))
}

fn quadrature(s: &Scenario) -> Result<Quadrature, CliError> {
    let q = s.transform.quadrature;
    if !(q > 0.0 && q.is_finite()) {
        return config(format!("transform.quadrature must be positive, got {q}"));
    }
    Ok(Quadrature::new(q))
}

fn attenuation(s: &Scenario) -> Result<AttenuationSpec, CliError> {
    let a = s.transform.attenuation;
    if !(a >= 0.0 && a.is_finite()) {
        return config(format!("transform.attenuation must be ≥ 0, got {a}"));
    }
    Ok(if a == 0.0 {
        AttenuationSpec::none()
    } else {
        AttenuationSpec::decay(a)
    })
}

fn trace(s: &Scenario, a: &mut Artifacts) -> Result<(), CliError> {
    let Some(t) = &s.trace else {
        return config("trace needs a [trace] table");
    };
    let start_dir = || match (t.start, t.direction) {
        (Some(p), Some(d)) if d.norm() > 0.0 => Ok((p, d.normalized())),
        _ => config("trace needs `start` and a nonzero `direction`"),
    };
    let (ray, residual): (BrokenRay, f64) = match &s.geometry {
        Geometry::Cone { .. } => {
            let c = cone(s)?;
            let (p, d) = start_dir()?;
            let r = c.trace(p, d, t.max_reflections)?;
            let res = r.reflection_residual(|x| c.edge_normal_at(x));
            (r, res)
        }
        Geometry::Tube { width, length } => {
            let tube = RectTube::new(*width, *length)?;
            let (p, d) = start_dir()?;
            let r = tube.trace(p, d, t.max_reflections)?;
            let res = r.reflection_residual(|_| Vec2::new(1.0, 0.0));
            (r, res)
        }
        Geometry::Disk {} => {
            let (Some(q), Some(p)) = (t.q, t.p) else {
                return config("disk traces need `q` and `p`");
            };
            let r = disk_star_orbit(q, p, t.phase)?;
            let res = r.reflection_residual(|x| x.normalized());
            (r, res)
        }
        _ => return config("trace supports cone, tube and disk geometries"),
    };
    a.add("ray.json", ray.to_json() + "\n");
    a.metric("reflections", ray.reflections());
    a.metric("length", ray.length());
    a.check_below("reflection_residual", residual, s.thresholds.max_residual);
    Ok(())
}

fn forward(s: &Scenario, a: &mut Artifacts) -> Result<(), CliError> {
    let c = cone(s)?;
    let (_, f) = planar_phantom(s)?;
    let quad = quadrature(s)?;
    let att = attenuation(s)?;
    let u = DihedralUnfolding::new(c.clone());
    let folded = u.fold_field(&f);
    let s_max = 1.05 * c.max_h();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut lines = Vec::with_capacity(s.transform.lines);
    let mut attempts = 0usize;
    while lines.len() < s.transform.lines {
        attempts += 1;
        if attempts > 100 * s.transform.lines.max(1) {
            return Err(brt_core::Error::DegenerateGeometry.into());
        }
        let line = Line::new(rng.gen_range(-s_max..s_max), rng.gen_range(0.0..TAU));
        if let Ok(chords) = u.fold_line_chords(&line) {
            lines.push((line, chords));
        }
    }
    let mut csv = String::from("phi,s,brt,radon,residual\n");
    let mut worst: f64 = 0.0;
    for (line, chords) in &lines {
        let mut brt = 0.0;
        for ch in chords {
            brt += brt_forward(&f, &ch.ray, att, &quad)?;
        }
        if att == AttenuationSpec::none() {
            let radon = radon_forward(&folded, line, &quad)?;
            let r = (brt - radon).abs() / (1.0 + radon.abs());
            worst = worst.max(r);
            writeln!(
                csv,
                "{},{},{},{},{}",
                line.angle, line.offset, brt, radon, r
            )
            .unwrap();
        } else {
            writeln!(csv, "{},{},{},,", line.angle, line.offset, brt).unwrap();
        }
    }
    a.add("forward.csv", csv);
    a.metric("lines", lines.len());
    if att == AttenuationSpec::none() {
        a.check_below(
            "max_identity_residual",
            worst,
            Some(s.thresholds.max_residual.unwrap_or(IDENTITY_TOLERANCE)),
        );
    }
    Ok(())
}

fn sinogram(s: &Scenario, a: &mut Artifacts) -> Result<(DihedralUnfolding, Sinogram), CliError> {
    let c = cone(s)?;
    let (_, f) = planar_phantom(s)?;
    let quad = quadrature(s)?;
    let att = attenuation(s)?;
    let geo = SinogramGeometry::new(s.transform.angles, s.transform.offsets, 1.05 * c.max_h())?;
    let u = DihedralUnfolding::new(c);
    let sino = assemble_sinogram(&u, |r| brt_forward(&f, r, att, &quad), geo)?;
    a.add("sinogram.csv", sino.to_csv());
    a.metric("angles", geo.n_angles);
    a.metric("offsets", geo.n_offsets);
    a.metric("excluded_fraction", sino.excluded_fraction());
    Ok((u, sino))
}

fn cone_grid(c: &ConeDomain, n: usize) -> Result<GridSpec, CliError> {
    if n < 2 {
        return config("inversion.grid must be at least 2");
    }
    let bb = c.bounding_box();
    let side = (bb.max.x - bb.min.x).max(bb.max.y - bb.min.y);
    Ok(GridSpec::new(n, n, bb.min, side / (n - 1) as f64))
}

fn add_grid(a: &mut Artifacts, g: &GridField) {
    a.add("reconstruction.csv", grid_to_csv(g));
    let (pgm, side) = grid_to_pgm(g);
    a.add("reconstruction.pgm", pgm);
    a.add(
        "reconstruction.pgm.json",
        serde_json::to_string_pretty(&side).unwrap() + "\n",
    );
}

fn reconstruct(s: &Scenario, a: &mut Artifacts) -> Result<(), CliError> {
    if s.transform.attenuation != 0.0 {
        return config("cone reconstruction needs unattenuated data");
    }
    let Some(inv) = &s.inversion else {
        return config("reconstruct needs an [inversion] table");
    };
    let (_, f) = planar_phantom(s)?;
    let (u, sino) = sinogram(s, a)?;
    let c = u.cone().clone();
    let inside = |p: Vec2| c.contains(p);
    match inv {
        Inversion::Fbp { grid, hann } => {
            if u.integer_m().is_none() {
                return config("fbp needs an opening angle π/m; use cgls for other angles");
            }
            let rec = reconstruct_cone_integer(
                &u,
                &sino,
                cone_grid(&c, *grid)?,
                FbpOptions { hann: *hann },
            )?;
            let err = relative_l2_error(&rec.field, &f, inside);
            a.metric("method", "fbp");
            a.metric("interpolated_cells", rec.interpolated_cells);
            a.metric("sector_consistency", rec.sector_consistency);
            a.check_below("rel_l2_error", err, s.thresholds.rel_l2_error);
            add_grid(a, &rec.field);
        }
        Inversion::Cgls {
            grid,
            basis,
            tolerance,
            max_iterations,
            apex_margin,
            shadow_margin,
        } => {
            let mut p = CglsParams {
                basis: *basis,
                apex_margin: *apex_margin,
                shadow_margin: *shadow_margin,
                ..Default::default()
            };
            if let Some(t) = tolerance {
                p.tolerance = *t;
            }
            if let Some(m) = max_iterations {
                p.max_iterations = *m;
            }
            let rec = reconstruct_cone_general(&u, &sino, cone_grid(&c, *grid)?, &p)?;
            let err = relative_l2_error(&rec.field, &f, inside);
            let monotone = rec
                .residuals
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            let mut csv = String::from("iteration,residual,normal_residual\n");
            for (k, (r, n)) in rec.residuals.iter().zip(&rec.normal_residuals).enumerate() {
                writeln!(csv, "{k},{r},{n}").unwrap();
            }
            a.metric("method", "cgls");
            a.metric("iterations", rec.iterations);
            a.metric("stop", serde_json::to_value(rec.stop).unwrap());
            a.metric("rows", rec.rows);
            a.metric("nonzeros", rec.nonzeros);
            a.metric("condition_estimate", rec.condition_estimate);
            a.metric("residual_monotone", monotone);
            a.pass &= monotone;
            a.check_below("rel_l2_error", err, s.thresholds.rel_l2_error);
            a.add("residuals.csv", csv);
            add_grid(a, &rec.field);
        }
        _ => return config("cone reconstruction supports the fbp and cgls methods"),
    }
    Ok(())
}

fn periodic_cube(s: &Scenario, a: &mut Artifacts) -> Result<(), CliError> {
    let Geometry::Cube { dim } = s.geometry else {
        return config("periodic-cube needs a cube geometry");
    };
    let p = phantom(s)?;
    let Some(f) = p.torus().cloned() else {
        return config("periodic-cube needs a torus phantom");
    };
    if f.dim != dim {
        return config(format!(
            "phantom dimension {} differs from cube dimension {dim}",
            f.dim
        ));
    }
    let band = s.transform.band.unwrap_or_else(|| f.band());
    let points = match &s.inversion {
        None => 33,
        Some(Inversion::Fourier { points }) => *points,
        Some(_) => return config("periodic-cube supports the fourier method only"),
    };
    let nodes = s.transform.nodes;
    let samples = Mutex::new(Vec::new());
    let rec = reconstruct_cube_periodic(
        dim,
        |orbit| {
            let v = periodic_brt_cube(|x| f.eval(x), orbit, nodes)?;
            samples.lock().unwrap().push(TorusSample {
                k: orbit.k.clone(),
                x0: orbit.x0.clone(),
                value: v,
            });
            Ok(v)
        },
        band,
        points,
    )?;
    let mut samples = samples.into_inner().unwrap();
    samples.sort_by(|x, y| x.k.cmp(&y.k).then_with(|| x.x0.partial_cmp(&y.x0).unwrap()));
    a.add("data.csv", torus_data_csv(dim, &samples));
    let mut csv = (1..=dim)
        .map(|i| format!("x{i}"))
        .collect::<Vec<_>>()
        .join(",")
        + ",value\n";
    let mut worst: f64 = 0.0;
    for (i, v) in rec.values.iter().enumerate() {
        let x = rec.node(i);
        worst = worst.max((v - f.eval(&x)).abs());
        let coords: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        writeln!(csv, "{},{v}", coords.join(",")).unwrap();
    }
    a.add("reconstruction.csv", csv);
    a.metric("band", band);
    a.metric("orbits", samples.len());
    a.metric("fold_asymmetry", rec.table.fold_asymmetry());
    a.check_below("max_abs_error", worst, s.thresholds.max_abs_error);
    Ok(())
}

fn octant_error(s: &Scenario, f: &SphereField, eval: impl Fn([f64; 3]) -> f64, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let w = brt_core::unfolding::normalize3([
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ]);
        let x = octant_fold_point(w);
        worst = worst.max((eval(x) - f.eval(x)).abs());
    }
    worst
}

fn octant(s: &Scenario, a: &mut Artifacts) -> Result<(), CliError> {
    if !matches!(s.geometry, Geometry::Octant {}) {
        return config("octant needs an octant geometry");
    }
    let p = phantom(s)?;
    let Some(f) = p.sphere().cloned() else {
        return config("octant needs a sphere phantom");
    };
    let l_max = s.transform.l_max.unwrap_or_else(|| f.degree());
    let samples = match &s.inversion {
        None => 1000,
        Some(Inversion::Funk { samples }) => *samples,
        Some(_) => return config("octant supports the funk method only"),
    };
    let nodes = s.transform.nodes;
    let rec = reconstruct_octant_periodic(|o| periodic_brt_octant(|x| f.eval(x), o, nodes), l_max)?;
    let mut csv = String::from("l,m,value\n");
    for l in 0..=l_max {
        for m in -(l as i64)..=l as i64 {
            writeln!(csv, "{l},{m},{}", rec.table.get(l, m)).unwrap();
        }
    }
    a.add("coefficients.csv", csv);
    a.metric("l_max", l_max);
    a.metric("violation_energy", rec.violation_energy);
    a.metric("total_energy", rec.total_energy);
    let err = octant_error(s, &f, |x| rec.eval(x), samples);
    a.check_below("max_abs_error", err, s.thresholds.max_abs_error);
    Ok(())
}

fn profile(s: &Scenario, length: f64) -> Result<RadialProfile, CliError> {
    let Some(kind) = s.null.as_ref().and_then(|n| n.profile.clone()) else {
        return config("null-check needs [null.profile]");
    };
    Ok(RadialProfile::new(kind, length)?)
}

fn null_check(s: &Scenario, a: &mut Artifacts) -> Result<(), CliError> {
    let Some(n) = &s.null else {
        return config("null-check needs a [null] table");
    };
    let report = match &s.geometry {
        Geometry::Tube { width, length } => {
            let tube = RectTube::new(*width, *length)?;
            let g = profile(s, *length)?;
            let out = tube_null_check(&tube, &g, n.rays, s.seed, &TUBE_QUADRATURE)?;
            let mut csv = String::from("start_x,dir_x,dir_y,reflections,integral,closed_form\n");
            for r in &out.samples {
                writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    r.start.x,
                    r.direction.x,
                    r.direction.y,
                    r.reflections,
                    r.integral,
                    r.closed_form
                )
                .unwrap();
            }
            a.add("rays.csv", csv);
            a.metric("max_closed_form_deviation", out.max_closed_form_deviation());
            out.report(s.thresholds.max_residual.unwrap_or(NULL_TOLERANCE))
        }
        Geometry::Disk {} => {
            let g = profile(s, 1.0)?;
            let quad = quadrature(s)?;
            let out = disk_null_check(&g, n.q_max, n.phases, &quad)?;
            let w = disk_positivity_witness(&g, n.q_max, n.phases, &quad)?;
            a.metric("positivity_witness", serde_json::to_value(w).unwrap());
            out.report(s.thresholds.max_residual.unwrap_or(NULL_TOLERANCE))
        }
        Geometry::Cylinder { length } => {
            let quad = quadrature(s)?;
            let out = cylinder_identity_check(n.attenuation, *length, n.modes, n.slopes, &quad)?;
            out.report(s.thresholds.max_residual.unwrap_or(CYLINDER_TOLERANCE))
        }
        _ => return config("null-check supports tube, disk and cylinder geometries"),
    };
    a.metric("check", report.check.clone());
    a.metric("parameters", report.parameters.clone());
    if let Some(r) = report.max_residual {
        a.metric("max_residual", r);
    }
    a.pass &= report.pass;
    Ok(())
}

fn att_probe(s: &Scenario, a: &mut Artifacts) -> Result<(), CliError> {
    let Geometry::Cylinder { length } = s.geometry else {
        return config("att-probe needs a cylinder geometry");
    };
    let Some(p) = &s.probe else {
        return config("att-probe needs a [probe] table");
    };
    let quad = quadrature(s)?;
    let probe = cylinder_injectivity_probe(p.attenuation, length, p.basis_size, p.slopes, &quad)?;
    let report = probe.report(CYLINDER_TOLERANCE);
    a.add(
        "probe.json",
        serde_json::to_string_pretty(&json!({
            "singular_values": probe.singular_values,
            "null_vector": probe.null_vector,
            "slopes": probe.slopes,
        }))
        .unwrap()
            + "\n",
    );
    a.metric("check", report.check.clone());
    a.metric("parameters", report.parameters.clone());
    a.metric("sigma_min", probe.sigma_min);
    a.pass &= report.pass;
    Ok(())
}
