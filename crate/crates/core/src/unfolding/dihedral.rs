use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Field2D;
use crate::geom::{point_segment_distance, Line, Rect, Vec2};
use crate::planar::{bisect, BoundaryRadius, BrokenRay, ConeDomain};

/// Ratio of the filler cone radius to `max h`.
pub const FILLER_RADIUS_FACTOR: f64 = 1.05;

/// Angular gap `[start, end]` (mod 2π) left by the reflected copies, covered
/// by a compact cone of radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Filler {
    pub start: f64,
    pub end: f64,
    pub radius: f64,
}

impl Filler {
    /// Euclidean distance from `p` to the closed filler cone.
    pub fn distance(&self, p: Vec2) -> f64 {
        let th = p.angle();
        if th >= self.start || th <= self.end - TAU {
            return (p.norm() - self.radius).max(0.0);
        }
        let edge =
            |beta: f64| point_segment_distance(p, Vec2::ZERO, Vec2::from_polar(self.radius, beta));
        edge(self.start).min(edge(self.end))
    }

    /// Whether the line meets the closed filler cone.
    pub fn hits_line(&self, line: &Line) -> bool {
        let Some((a, b)) = line.circle_crossings(self.radius) else {
            return false;
        };
        let in_gap = |th: f64| th >= self.start - 1e-15 || th <= self.end - TAU + 1e-15;
        if in_gap(line.point_at(a).angle()) || in_gap(line.point_at(b).angle()) {
            return true;
        }
        [self.start, self.end]
            .iter()
            .any(|&beta| line.ray_crossing(beta).is_some_and(|t| t >= a && t <= b))
    }
}

/// Reflection unfolding of a planar cone: `K` copies of the cone placed
/// around the apex by successive reflections across the edges, so that
/// broken rays become straight chords.
#[derive(Debug, Clone, PartialEq)]
pub struct DihedralUnfolding {
    cone: ConeDomain,
    copies: usize,
    integer_m: Option<u32>,
    filler: Option<Filler>,
}

/// Serializable summary of an unfolding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingDescription {
    pub opening_angle: f64,
    pub copies: usize,
    pub integer_m: Option<u32>,
    pub filler: Option<Filler>,
    pub boundary: BoundaryRadius,
}

/// A chord of a line through the unfolded cone and the broken ray it folds to.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedChord {
    pub ray: BrokenRay,
    /// Sector containing the chord's entry point.
    pub entry_sector: usize,
    /// Line parameters of the chord ends.
    pub t_start: f64,
    pub t_end: f64,
}

/// Straight segment obtained by unfolding a broken ray.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedRay {
    pub vertices: Vec<Vec2>,
    pub start: Vec2,
    pub direction: Vec2,
    pub length: f64,
}

impl UnfoldedRay {
    pub fn line(&self) -> Line {
        Line::through(self.start, self.direction)
    }

    /// Largest distance of a vertex from the start–end line, relative to the
    /// length.
    pub fn collinearity_residual(&self) -> f64 {
        let n = self.direction.perp();
        self.vertices
            .iter()
            .map(|&v| (v - self.start).dot(n).abs())
            .fold(0.0, f64::max)
            / self.length
    }
}

impl DihedralUnfolding {
    pub fn new(cone: ConeDomain) -> Self {
        let a = cone.alpha();
        let ratio = PI / a;
        let m = ratio.round();
        if m >= 1.0 && (ratio - m).abs() < 1e-9 {
            return Self {
                copies: 2 * m as usize,
                integer_m: Some(m as u32),
                filler: None,
                cone,
            };
        }
        let k = ((PI / a) - 1e-12).ceil().max(1.0) as usize;
        let filler = Filler {
            start: k as f64 * a,
            end: TAU,
            radius: FILLER_RADIUS_FACTOR * cone.max_h(),
        };
        Self {
            copies: k,
            integer_m: None,
            filler: Some(filler),
            cone,
        }
    }

    pub fn cone(&self) -> &ConeDomain {
        &self.cone
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn integer_m(&self) -> Option<u32> {
        self.integer_m
    }

    pub fn filler(&self) -> Option<&Filler> {
        self.filler.as_ref()
    }

    /// Smallest distance from an unfolded copy of `x ∈ C` to the filler cone;
    /// `None` without a filler.
    pub fn filler_distance(&self, x: Vec2) -> Option<f64> {
        let f = self.filler.as_ref()?;
        (0..self.copies)
            .map(|i| f.distance(self.section(i, x)))
            .reduce(f64::min)
    }

    pub fn describe(&self) -> UnfoldingDescription {
        UnfoldingDescription {
            opening_angle: self.cone.alpha(),
            copies: self.copies,
            integer_m: self.integer_m,
            filler: self.filler,
            boundary: self.cone.radius.clone(),
        }
    }

    fn alpha(&self) -> f64 {
        self.cone.alpha()
    }

    /// Folds a polar angle into `[0, α]`.
    pub fn fold_angle(&self, theta: f64) -> f64 {
        let a = self.alpha();
        let t = theta.rem_euclid(2.0 * a);
        if t <= a {
            t
        } else {
            2.0 * a - t
        }
    }

    fn in_filler_angle(&self, theta: f64) -> bool {
        self.filler.is_some_and(|f| theta > f.start + 1e-13)
    }

    pub fn sector_of_angle(&self, theta: f64) -> usize {
        ((theta / self.alpha()).floor() as usize).min(self.copies - 1)
    }

    /// `ι_i`: maps a point of the cone onto sector `i`.
    pub fn section(&self, sector: usize, p: Vec2) -> Vec2 {
        let a = self.alpha();
        let th = p.angle();
        let th = if th > a + 0.5 * (TAU - a) {
            th - TAU
        } else {
            th
        };
        let r = p.norm();
        if sector % 2 == 0 {
            Vec2::from_polar(r, sector as f64 * a + th)
        } else {
            Vec2::from_polar(r, (sector + 1) as f64 * a - th)
        }
    }

    /// `p`: the sector index of `x` and its image in the closed cone.
    pub fn fold_point(&self, x: Vec2) -> Result<(usize, Vec2)> {
        let r = x.norm();
        if r == 0.0 {
            return Err(Error::OutsideUnfolding);
        }
        let th = x.angle();
        if self.in_filler_angle(th) {
            return Err(Error::OutsideUnfolding);
        }
        Ok((
            self.sector_of_angle(th),
            Vec2::from_polar(r, self.fold_angle(th)),
        ))
    }

    fn fold_unchecked(&self, x: Vec2) -> Vec2 {
        Vec2::from_polar(x.norm(), self.fold_angle(x.angle()))
    }

    /// Outer radius of the unfolded region at polar angle `theta`.
    pub fn unfolded_radius(&self, theta: f64) -> f64 {
        self.cone.radius.eval(self.fold_angle(theta))
    }

    pub fn unfolded_contains(&self, x: Vec2) -> bool {
        let r = x.norm();
        if r == 0.0 {
            return false;
        }
        let th = x.angle();
        !self.in_filler_angle(th) && r <= self.unfolded_radius(th)
    }

    /// Signed radial residual along a line (negative inside the region).
    fn boundary_residual(&self, line: &Line, t: f64) -> f64 {
        let x = line.point_at(t);
        x.norm() - self.unfolded_radius(x.angle())
    }

    /// Parameter intervals where the line lies inside the unfolded region.
    fn chords(&self, line: &Line) -> Vec<(f64, f64)> {
        if let BoundaryRadius::Constant { radius } = self.cone.radius {
            return line.circle_crossings(radius).into_iter().collect();
        }
        let rmax = self.cone.max_h();
        let Some((lo, hi)) = line.circle_crossings(rmax * (1.0 + 1e-9)) else {
            return Vec::new();
        };
        let f = |t: f64| self.boundary_residual(line, t);
        let steps = ((hi - lo) / (self.cone.min_h() / 512.0)).ceil().max(8.0) as usize;
        let dt = (hi - lo) / steps as f64;
        let mut out = Vec::new();
        let mut open: Option<f64> = None;
        let mut prev_t = lo;
        let mut prev = f(lo);
        for s in 1..=steps {
            let t = lo + s as f64 * dt;
            let v = f(t);
            if prev >= 0.0 && v < 0.0 {
                open = Some(bisect(|x| -f(x), prev_t, t));
            } else if prev < 0.0 && v >= 0.0 {
                let end = bisect(f, prev_t, t);
                out.push((open.take().unwrap_or(lo), end));
            }
            prev = v;
            prev_t = t;
        }
        out
    }

    /// Rays separating neighbouring sectors that a chord may cross.
    fn interior_rays(&self) -> Vec<f64> {
        let a = self.alpha();
        match self.filler {
            None => (0..self.copies).map(|i| i as f64 * a).collect(),
            Some(_) => (1..self.copies).map(|i| i as f64 * a).collect(),
        }
    }

    /// All chords of `line` through the unfolded region, folded to broken rays.
    pub fn fold_line_chords(&self, line: &Line) -> Result<Vec<FoldedChord>> {
        let eps = self.cone.eps_tip();
        if line.offset.abs() < eps {
            return Err(Error::ApexLine);
        }
        if self.filler.is_some_and(|f| f.hits_line(line)) {
            return Err(Error::FillerConeHit);
        }
        let chords = self.chords(line);
        if chords.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        let rays = self.interior_rays();
        let a = self.alpha();
        let mut out = Vec::with_capacity(chords.len());
        for (t0, t1) in chords {
            let mut cross: Vec<(f64, f64)> = rays
                .iter()
                .enumerate()
                .filter_map(|(i, &beta)| line.ray_crossing(beta).map(|t| (t, i as f64)))
                .filter(|&(t, _)| t > t0 && t < t1)
                .collect();
            cross.sort_by(|x, y| x.0.total_cmp(&y.0));
            let p0 = line.point_at(t0);
            let p1 = line.point_at(t1);
            let mut verts = Vec::with_capacity(cross.len() + 2);
            verts.push(self.fold_unchecked(p0));
            for &(t, i) in &cross {
                let q = line.point_at(t);
                if q.dist(p0) < eps || q.dist(p1) < eps {
                    return Err(Error::TipHit { x: q.x, y: q.y });
                }
                let sector = if self.filler.is_some() {
                    i as usize + 1
                } else {
                    i as usize
                };
                let edge = if sector % 2 == 0 { 0.0 } else { a };
                verts.push(Vec2::from_polar(q.norm(), edge));
            }
            verts.push(self.fold_unchecked(p1));
            let first_end = cross.first().map_or(t1, |c| c.0);
            let entry = self.sector_of_angle(line.point_at(0.5 * (t0 + first_end)).angle());
            out.push(FoldedChord {
                ray: BrokenRay::open(verts),
                entry_sector: entry,
                t_start: t0,
                t_end: t1,
            });
        }
        Ok(out)
    }

    /// The broken ray of the first chord of `line`.
    pub fn fold_line(&self, line: &Line) -> Result<BrokenRay> {
        Ok(self.fold_line_chords(line)?.swap_remove(0).ray)
    }

    /// Which edge a reflection vertex sits on: `false` for `θ = 0`, `true`
    /// for `θ = α`. `incoming` disambiguates the slit of a full-turn cone.
    fn on_far_edge(&self, v: Vec2, incoming: Vec2) -> bool {
        let w = self.cone.edge_direction();
        let d0 = if v.x > 0.0 { v.y.abs() } else { f64::INFINITY };
        let da = if v.dot(w) > 0.0 {
            v.cross(w).abs()
        } else {
            f64::INFINITY
        };
        let tol = 1e-9 * self.cone.max_h();
        if d0 <= tol && da <= tol {
            // both edges coincide: the interior side is given by the approach
            return incoming.dot(w.perp()) > 0.0;
        }
        da < d0
    }

    /// Sectors visited by `ray` when it starts in `initial`; entry `k` is the
    /// sector after the `k`-th reflection.
    fn sector_walk(&self, ray: &BrokenRay, initial: i64) -> Vec<i64> {
        let v = ray.vertices();
        let mut walk = vec![initial];
        let mut s = initial;
        for k in 1..v.len() - 1 {
            let incoming = v[k] - v[k - 1];
            let far = self.on_far_edge(v[k], incoming);
            // edge images: even sector maps θ=0 to its lower ray, odd to its upper ray
            let up = far == (s.rem_euclid(2) == 0);
            s += if up { 1 } else { -1 };
            walk.push(s);
        }
        walk
    }

    /// Initial sector that keeps the unfolded ray inside the `K` copies:
    /// sector 0 for a full tiling, otherwise the smallest feasible one.
    pub fn canonical_sector(&self, ray: &BrokenRay) -> Result<usize> {
        if self.filler.is_none() {
            return Ok(0);
        }
        let k = self.copies as i64;
        (0..k)
            .find(|&i| {
                self.sector_walk(ray, i)
                    .iter()
                    .all(|&s| (0..k).contains(&s))
            })
            .map(|i| i as usize)
            .ok_or(Error::FillerConeHit)
    }

    /// Replaces each segment of `ray` by its mirror image in the appropriate
    /// copy, starting in `initial_sector`.
    pub fn unfold_broken_ray(&self, ray: &BrokenRay, initial_sector: usize) -> Result<UnfoldedRay> {
        if initial_sector >= self.copies {
            return Err(Error::InvalidParameter(format!(
                "sector {initial_sector} ≥ {}",
                self.copies
            )));
        }
        let eps = self.cone.eps_tip();
        if let Some(v) = ray.vertices().iter().find(|v| v.norm() < eps) {
            return Err(Error::TipHit { x: v.x, y: v.y });
        }
        let k = self.copies as i64;
        let walk = self.sector_walk(ray, initial_sector as i64);
        let v = ray.vertices();
        let mut out = Vec::with_capacity(v.len());
        for (idx, &p) in v.iter().enumerate() {
            // a reflection vertex belongs to the sector it is entered from
            let s = walk[idx.saturating_sub(1)];
            let s = if self.filler.is_none() {
                s.rem_euclid(k)
            } else if s < 0 || s >= k {
                return Err(Error::FillerConeHit);
            } else {
                s
            };
            out.push(self.section(s as usize, p));
        }
        let start = out[0];
        let end = *out.last().unwrap();
        let length = start.dist(end);
        Ok(UnfoldedRay {
            direction: (end - start) * (1.0 / length),
            start,
            length,
            vertices: out,
        })
    }

    pub fn fold_field<'a>(&'a self, base: &'a dyn Field2D) -> FoldedField<'a> {
        FoldedField {
            base,
            unfolding: self,
        }
    }
}

/// `f̃ = f∘p` on the unfolded region, zero elsewhere.
pub struct FoldedField<'a> {
    base: &'a dyn Field2D,
    unfolding: &'a DihedralUnfolding,
}

impl Field2D for FoldedField<'_> {
    fn eval(&self, x: Vec2) -> f64 {
        if !self.unfolding.unfolded_contains(x) {
            return 0.0;
        }
        self.base.eval(self.unfolding.fold_unchecked(x))
    }

    fn support(&self) -> Rect {
        Rect::centered(Vec2::ZERO, self.unfolding.cone.max_h())
    }

    fn breakpoints(&self, p: Vec2, u: Vec2, len: f64, out: &mut Vec<f64>) {
        let u_ = self.unfolding;
        let line = Line::through(p, u);
        let tp = line.param_of(p);
        let mut cuts: Vec<f64> = Vec::new();
        for (a, b) in u_.chords(&line) {
            cuts.push(a - tp);
            cuts.push(b - tp);
        }
        let mut rays = u_.interior_rays();
        if let Some(f) = u_.filler {
            rays.push(0.0);
            rays.push(f.start);
        }
        for beta in rays {
            if let Some(t) = line.ray_crossing(beta) {
                cuts.push(t - tp);
            }
        }
        cuts.retain(|&t| t > 0.0 && t < len);
        cuts.sort_by(f64::total_cmp);
        out.extend_from_slice(&cuts);

        // the base field's own breakpoints, pulled back piece by piece
        cuts.insert(0, 0.0);
        cuts.push(len);
        let mut extra = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a <= 0.0 || !u_.unfolded_contains(p + u * (0.5 * (a + b))) {
                continue;
            }
            let qa = u_.fold_unchecked(p + u * a);
            let qb = u_.fold_unchecked(p + u * b);
            let l = qa.dist(qb);
            if l == 0.0 {
                continue;
            }
            extra.clear();
            self.base
                .breakpoints(qa, (qb - qa) * (1.0 / l), l, &mut extra);
            out.extend(extra.iter().map(|t| a + t));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(alpha: f64) -> ConeDomain {
        ConeDomain::new(alpha, BoundaryRadius::constant(1.0)).unwrap()
    }

    #[test]
    fn copy_counts() {
        assert_eq!(DihedralUnfolding::new(cone(PI)).copies(), 2);
        assert_eq!(DihedralUnfolding::new(cone(PI / 3.0)).copies(), 6);
        let g = DihedralUnfolding::new(cone(2.0 * PI / 3.0));
        assert_eq!(g.copies(), 2);
        let f = g.filler().unwrap();
        assert!((f.start - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((f.radius - 1.05).abs() < 1e-15);
        assert_eq!(DihedralUnfolding::new(cone(0.4 * PI)).copies(), 3);
        assert_eq!(DihedralUnfolding::new(cone(TAU)).copies(), 1);
    }

    #[test]
    fn fold_is_identity_on_sector_zero() {
        let u = DihedralUnfolding::new(cone(PI / 3.0));
        let x = Vec2::from_polar(0.7, 0.4);
        let (s, y) = u.fold_point(x).unwrap();
        assert_eq!(s, 0);
        assert!(y.dist(x) < 1e-15);
    }

    #[test]
    fn fold_reflects_second_sector() {
        let u = DihedralUnfolding::new(cone(PI / 3.0));
        let x = Vec2::from_polar(0.7, PI / 3.0 + 0.1);
        let (s, y) = u.fold_point(x).unwrap();
        assert_eq!(s, 1);
        assert!((y.angle() - (PI / 3.0 - 0.1)).abs() < 1e-14);
        assert!((y.norm() - 0.7).abs() < 1e-15);
        assert!(u.section(s, y).dist(x) < 1e-12);
    }

    #[test]
    fn apex_and_filler_are_outside() {
        let u = DihedralUnfolding::new(cone(2.0 * PI / 3.0));
        assert_eq!(u.fold_point(Vec2::ZERO), Err(Error::OutsideUnfolding));
        assert_eq!(
            u.fold_point(Vec2::from_polar(0.5, 1.6 * PI)),
            Err(Error::OutsideUnfolding)
        );
    }

    #[test]
    fn fold_line_examples() {
        let u = DihedralUnfolding::new(cone(PI));
        // the line through (0, 1) and (√3/2, −1/2) folds to the one-reflection ray
        let s3 = 3f64.sqrt();
        let d = Vec2::new(0.5, -s3 / 2.0);
        let ray = u.fold_line(&Line::through(Vec2::new(0.0, 1.0), d)).unwrap();
        assert_eq!(ray.reflections(), 1);
        assert!(ray.start().dist(Vec2::new(0.0, 1.0)) < 1e-12);
        assert!(ray.vertices()[1].dist(Vec2::new(1.0 / s3, 0.0)) < 1e-12);
        assert!(ray.end().dist(Vec2::new(s3 / 2.0, 0.5)) < 1e-12);

        // a chord inside sector 0 only
        let ray = u.fold_line(&Line::new(0.5, PI / 2.0)).unwrap();
        assert_eq!(ray.reflections(), 0);

        assert_eq!(u.fold_line(&Line::new(0.0, 0.3)), Err(Error::ApexLine));
        assert_eq!(
            u.fold_line(&Line::new(1.5, 0.3)),
            Err(Error::EmptyIntersection)
        );
    }

    #[test]
    fn unfolding_the_example_ray_gives_the_mirror_chord() {
        let c = cone(PI);
        let u = DihedralUnfolding::new(c.clone());
        let s3 = 3f64.sqrt();
        let ray = c
            .trace(Vec2::new(0.0, 1.0), Vec2::new(0.5, -s3 / 2.0), 8)
            .unwrap();
        let un = u.unfold_broken_ray(&ray, 0).unwrap();
        assert!(un.start.dist(Vec2::new(0.0, 1.0)) < 1e-12);
        assert!(un.vertices.last().unwrap().dist(Vec2::new(s3 / 2.0, -0.5)) < 1e-12);
        assert!((un.length - s3).abs() < 1e-12);
        assert!(un.collinearity_residual() < 1e-12);
    }

    #[test]
    fn filler_lines_are_rejected() {
        let u = DihedralUnfolding::new(cone(2.0 * PI / 3.0));
        // vertical line x = 0.3 crosses angles around 3π/2 at y < 0
        assert_eq!(u.fold_line(&Line::new(0.3, 0.0)), Err(Error::FillerConeHit));
        // a line in the upper half plane avoids the filler
        assert!(u.fold_line(&Line::new(0.5, PI / 2.0)).is_ok());
    }

    #[test]
    fn full_turn_slit_is_a_zero_width_filler() {
        let u = DihedralUnfolding::new(cone(TAU));
        assert_eq!(u.fold_line(&Line::new(0.5, 0.0)), Err(Error::FillerConeHit));
        assert!(u.fold_line(&Line::new(-0.5, 0.0)).is_ok());
    }
}
