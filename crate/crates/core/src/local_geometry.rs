//! Metric balls and the bounded-local-geometry certificate: a radius-1
//! Hilbert ball, normalized by its John ellipsoid, is uniformly
//! bi-Lipschitz to a Euclidean domain.

use std::f64::consts::E;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::ConvexBody;
use crate::directions::{covering_angle, halton, sphere, tangent_basis};
use crate::error::{GeometryError, Result};
use crate::john::{certify, john_estimate, refine_with_cuts, ConvexRegion, Ellipsoid};
use crate::measure::{convexity_probe, radial_parameter};
use crate::metric::{distance_gradient, hilbert_distance};
use crate::numeric::{golden_max, sym_apply};
use crate::{Point, Vector};

/// `2 e^4 + 1`: the Lipschitz bound of the normalized Finsler norm; its
/// inverse bounds the gap between a normalized ball and the boundary.
pub fn lip_upper_bound() -> f64 {
    2.0 * E.powi(4) + 1.0
}

/// Lower bound `1 / (2 e^4 + 1)` on the normalized boundary gap.
pub fn gap_bound() -> f64 {
    1.0 / lip_upper_bound()
}

/// `5 sqrt(n) + 3 (2 e^4 + 1) n`: bound on the nearer chord exit from a
/// point of the normalized ball.
pub fn chord_bound(n: usize) -> f64 {
    5.0 * (n as f64).sqrt() + 3.0 * lip_upper_bound() * n as f64
}

/// `1 / (2 chord_bound(n))`.
pub fn lip_lower_bound(n: usize) -> f64 {
    1.0 / (2.0 * chord_bound(n))
}

/// `3 sqrt(n)`: bound on the nearer chord exit at the ball's center.
pub fn center_exit_bound(n: usize) -> f64 {
    3.0 * (n as f64).sqrt()
}

/// A Hilbert metric ball `B(center, radius)`, stored as its Euclidean
/// radial function on a deterministic direction set.
#[derive(Debug, Clone)]
pub struct RadialBall {
    body: ConvexBody,
    pub center: Point,
    pub radius: f64,
    pub directions: Vec<Vector>,
    pub radii: Vec<f64>,
}

/// The metric ball of Hilbert radius `r` around `p`, sampled on
/// `resolution` directions. Radii are obtained by inverting the distance
/// along each ray in closed form.
pub fn metric_ball(body: &ConvexBody, p: &Point, r: f64, resolution: usize) -> Result<RadialBall> {
    body.check_dim(p)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeometryError::InvalidArgument(
            "ball radius must be positive".into(),
        ));
    }
    let directions = sphere(body.dim(), resolution);
    let radii = directions
        .iter()
        .map(|u| {
            let c = body.chord(p, u)?;
            Ok(radial_parameter(c.t_minus, c.t_plus, r).0)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RadialBall {
        body: body.clone(),
        center: p.clone(),
        radius: r,
        directions,
        radii,
    })
}

impl RadialBall {
    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn boundary_points(&self) -> Vec<Point> {
        self.directions
            .iter()
            .zip(&self.radii)
            .map(|(u, t)| &self.center + u * *t)
            .collect()
    }

    /// Euclidean radius along a unit direction, evaluated exactly.
    pub fn radius_along(&self, u: &Vector) -> Result<f64> {
        let c = self.body.chord(&self.center, u)?;
        Ok(radial_parameter(c.t_minus, c.t_plus, self.radius).0)
    }

    /// Convexity probe on the sampled boundary (membership by distance).
    pub fn convexity_probe(&self) -> Result<bool> {
        let rel: Vec<Vector> = self
            .directions
            .iter()
            .zip(&self.radii)
            .map(|(u, t)| u * *t)
            .collect();
        convexity_probe(&rel, |x| {
            Ok(
                hilbert_distance(&self.body, &self.center, &(&self.center + x))?
                    <= self.radius + 1e-9,
            )
        })
    }
}

impl ConvexRegion for RadialBall {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn anchor(&self) -> Point {
        self.center.clone()
    }
    fn support(&self, w: &Vector) -> Result<f64> {
        let base = self.center.dot(w);
        let (mut best, mut value) = (0, f64::NEG_INFINITY);
        for (k, (u, t)) in self.directions.iter().zip(&self.radii).enumerate() {
            let h = base + t * u.dot(w);
            if h > value {
                best = k;
                value = h;
            }
        }
        if self.dim() != 2 {
            return Ok(value);
        }
        // the sampled maximum misses corners; refine between the neighbors
        let u = &self.directions[best];
        let theta = u[1].atan2(u[0]);
        let step = 2.0 * std::f64::consts::PI / self.directions.len() as f64;
        let (_, refined) = golden_max(
            |a| {
                let u = DVector::from_vec(vec![a.cos(), a.sin()]);
                self.radius_along(&u)
                    .map_or(f64::NEG_INFINITY, |t| base + t * u.dot(w))
            },
            theta - step,
            theta + step,
            1e-13,
            100,
        );
        Ok(value.max(refined))
    }
    fn ray_exit(&self, from: &Point, dir: &Vector) -> Result<f64> {
        let scale = dir.norm();
        if from == &self.center {
            return Ok(self.radius_along(&(dir / scale))? / scale);
        }
        if !self.contains_point(from) {
            return Err(GeometryError::NotInterior);
        }
        // d(center, from + t dir) - r and its t-derivative from one chord
        let excess = |t: f64| -> Result<(f64, f64)> {
            let y = from + dir * t;
            if !self.body.contains_unchecked(&y) {
                return Ok((f64::INFINITY, 0.0));
            }
            let v = &y - &self.center;
            let d = self.body.chord_detail(&self.center, &v)?;
            let (tm, tp) = (d.chord.t_minus, d.chord.t_plus);
            if tp <= 1.0 {
                return Ok((f64::INFINITY, 0.0));
            }
            let rho = 0.5 * ((1.0 / -tm).ln_1p() + (1.0 / (tp - 1.0)).ln_1p());
            let (na, nb) = (&d.normal_minus, &d.normal_plus);
            let slope = 0.5
                * (na.dot(dir) / (na.dot(&v) * (1.0 - tm))
                    + nb.dot(dir) / (nb.dot(&v) * (tp - 1.0)));
            Ok((rho - self.radius, slope))
        };
        // safeguarded Newton; `lo` stays inside, `hi` outside
        let (mut lo, mut hi) = (0.0, self.body.chord(from, dir)?.t_plus);
        let (mut t, (mut g, mut slope)) = (0.0, excess(0.0)?);
        for _ in 0..200 {
            let newton = t - g / slope;
            let step_ok = slope > 0.0 && newton > lo && newton < hi;
            if step_ok && g < 0.0 && (newton - t) <= 1e-14 * t {
                break;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            t = if step_ok { newton } else { 0.5 * (lo + hi) };
            (g, slope) = excess(t)?;
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
        }
        Ok(lo)
    }
    fn contains_point(&self, x: &Point) -> bool {
        self.body.contains_unchecked(x)
            && hilbert_distance(&self.body, &self.center, x).is_ok_and(|d| d < self.radius)
    }
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// A metric ball mapped so that its John ellipsoid is the Euclidean unit
/// ball centred at the origin.
#[derive(Debug, Clone)]
pub struct NormalizedBall {
    /// `x -> map (x - origin)`.
    pub map: DMatrix<f64>,
    pub origin: Point,
    pub ellipsoid: Ellipsoid,
    pub mapped_body: ConvexBody,
    pub mapped_center: Point,
    pub mapped_boundary: Vec<Point>,
    /// Outward unit normals of the mapped ball at `mapped_boundary`.
    pub mapped_normals: Vec<Vector>,
    pub boundary_norm_min: f64,
    pub boundary_norm_max: f64,
}

impl NormalizedBall {
    pub fn apply(&self, x: &Point) -> Point {
        &self.map * (x - &self.origin)
    }
}

/// Computes the John ellipsoid of the ball and the affine map sending it to
/// the unit ball (`x -> B^{-1} (x - c)` with `B` the symmetric factor).
pub fn john_normalize_ball(ball: &RadialBall, facet_budget: usize) -> Result<NormalizedBall> {
    let body = ball.body();
    let n = body.dim();
    let pts = ball.boundary_points();
    let mean = pts.iter().fold(DVector::zeros(n), |a, p| a + p) / pts.len() as f64;
    let cov = pts.iter().fold(DMatrix::zeros(n, n), |a, p| {
        a + (p - &mean) * (p - &mean).transpose()
    }) / pts.len() as f64;
    let w = sym_apply(&cov, |x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt());
    let shift = -(&w * &mean);
    let count = ball.directions.len();
    let (mut frame, mut frame_shift) = (w, shift);
    let mut best: Option<(Ellipsoid, f64, f64)> = None;
    for _ in 0..4 {
        let framed_body = body.affine_image(&frame, &frame_shift)?;
        let framed_center = &frame * &ball.center + &frame_shift;
        let framed = metric_ball(&framed_body, &framed_center, ball.radius, count)?;
        let (outer, lambda) = john_estimate(&framed, facet_budget, false, false)?;
        let inv = frame
            .clone()
            .try_inverse()
            .ok_or(GeometryError::SingularMap(0.0))?;
        let outer = outer.affine_image(&inv, &(-(&inv * &frame_shift)))?;
        let volume = outer.volume() * lambda.powi(n as i32);
        let gain = best.as_ref().map_or(f64::INFINITY, |b| volume / b.1);
        if gain > 1.0 {
            let e = outer.dilate(lambda);
            frame = sym_apply(e.factor(), |x| 1.0 / x);
            frame_shift = -(&frame * &e.center);
            best = Some((outer, volume, lambda));
        }
        if gain < 1.0 + 1e-4 {
            break;
        }
    }
    let (outer, _, lambda) =
        best.ok_or_else(|| GeometryError::NoConvergence("john normalization".into()))?;
    let frame = sym_apply(outer.factor(), |x| 1.0 / x);
    let frame_shift = -(&frame * &outer.center);
    let framed = metric_ball(
        &body.affine_image(&frame, &frame_shift)?,
        &(&frame * &ball.center + &frame_shift),
        ball.radius,
        count,
    )?;
    let unit = outer.affine_image(&frame, &frame_shift)?;
    let (unit, _) = refine_with_cuts(&framed, unit, lambda, facet_budget, false)?;
    let inv = frame
        .clone()
        .try_inverse()
        .ok_or(GeometryError::SingularMap(0.0))?;
    let e = certify(&framed, &unit)?.affine_image(&inv, &outer.center)?;
    let map = sym_apply(e.factor(), |x| 1.0 / x);
    let origin = e.center.clone();
    let mapped_body = body.affine_image(&map, &(-(&map * &origin)))?;
    let mapped_center = &map * (&ball.center - &origin);
    let resampled = metric_ball(&mapped_body, &mapped_center, ball.radius, count)?;
    let mut mapped_boundary = Vec::with_capacity(count);
    let mut mapped_normals = Vec::with_capacity(count);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for y in resampled.boundary_points() {
        let g = distance_gradient(&mapped_body, &mapped_center, &y)?;
        lo = lo.min(y.norm());
        hi = hi.max(y.norm());
        mapped_normals.push(g.components().normalize());
        mapped_boundary.push(y);
    }
    Ok(NormalizedBall {
        map,
        origin,
        ellipsoid: e,
        mapped_body,
        mapped_center,
        mapped_boundary,
        mapped_normals,
        boundary_norm_min: lo,
        boundary_norm_max: hi,
    })
}

/// Sampling densities for [`theorem12_report`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem12Config {
    pub boundary_directions: usize,
    pub interior_points: usize,
    pub step_directions: usize,
    pub facet_budget: usize,
}

impl Theorem12Config {
    pub fn default_for(dim: usize) -> Self {
        if dim <= 2 {
            Theorem12Config {
                boundary_directions: 512,
                interior_points: 256,
                step_directions: 64,
                facet_budget: 512,
            }
        } else {
            Theorem12Config {
                boundary_directions: 2048,
                interior_points: 1024,
                step_directions: 128,
                facet_budget: 256,
            }
        }
    }
}

/// Step 1 result: Euclidean gap between the normalized ball and the
/// normalized body.
#[derive(Debug, Clone, Serialize)]
pub struct GapResult {
    /// Best (smallest) gap found.
    pub d0: f64,
    /// Gap measured along the ball normals only.
    pub d0_normal_probe: f64,
    /// `d0` minus the boundary sample spacing.
    pub d0_lower: f64,
    /// Ball boundary point realizing `d0` (normalized coordinates).
    pub q: Vec<f64>,
    /// Body boundary point realizing `d0`.
    pub q0: Vec<f64>,
}

/// Minimizes the exit distance from `y` over directions: the Euclidean
/// distance from `y` to the boundary of `body`.
fn boundary_distance(
    body: &ConvexBody,
    y: &Point,
    start: &Vector,
    refine: bool,
) -> Result<(f64, Vector)> {
    let n = body.dim();
    let exit = |v: &Vector| -> Result<f64> { Ok(body.chord(y, &v.normalize())?.t_plus) };
    let mut best = exit(start)?;
    let mut best_v = start.normalize();
    for v in sphere(n, 32) {
        let t = exit(&v)?;
        if t < best {
            best = t;
            best_v = v;
        }
    }
    if refine {
        let mut failure = None;
        let span = covering_angle(n, 32).unwrap_or(0.3) * 1.5;
        for _ in 0..3 {
            for t in tangent_basis(&best_v) {
                let base = best_v.clone();
                let (a, f) = golden_max(
                    |a| match exit(&(&base + &t * a.tan())) {
                        Ok(x) => -x,
                        Err(e) => {
                            failure = Some(e);
                            f64::NEG_INFINITY
                        }
                    },
                    -span,
                    span,
                    1e-12,
                    80,
                );
                if -f < best {
                    best = -f;
                    best_v = (&base + &t * a.tan()).normalize();
                }
            }
        }
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok((best, best_v))
}

/// Step 1: the Euclidean distance between the boundaries of the normalized
/// ball and the normalized body, by normal probes plus direction search.
pub fn step1_gap(nb: &NormalizedBall) -> Result<GapResult> {
    let body = &nb.mapped_body;
    let probes: Vec<Result<(f64, f64, Vector)>> = nb
        .mapped_boundary
        .par_iter()
        .zip(nb.mapped_normals.par_iter())
        .map(|(y, nu)| {
            let normal = body.chord(y, nu)?.t_plus;
            let (d, v) = boundary_distance(body, y, nu, false)?;
            Ok((normal, d, v))
        })
        .collect();
    let probes = probes.into_iter().collect::<Result<Vec<_>>>()?;
    let d0_normal_probe = probes.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut order: Vec<usize> = (0..probes.len()).collect();
    order.sort_by(|&a, &b| probes[a].1.total_cmp(&probes[b].1));
    let refined: Vec<Result<(f64, Vector, usize)>> = order
        .par_iter()
        .take(16)
        .map(|&k| {
            let (d, v) = boundary_distance(body, &nb.mapped_boundary[k], &probes[k].2, true)?;
            Ok((d, v, k))
        })
        .collect();
    let mut best = (f64::INFINITY, DVector::zeros(body.dim()), 0usize);
    for r in refined {
        let r = r?;
        if r.0 < best.0 {
            best = r;
        }
    }
    let d0 = best.0.min(d0_normal_probe);
    let spacing = sample_spacing(&nb.mapped_boundary);
    let q = nb.mapped_boundary[best.2].clone();
    let q0 = &q + &best.1 * best.0;
    Ok(GapResult {
        d0,
        d0_normal_probe,
        d0_lower: d0 - spacing,
        q: q.iter().cloned().collect(),
        q0: q0.iter().cloned().collect(),
    })
}

/// Largest distance from a sample to its nearest neighbour.
fn sample_spacing(pts: &[Point]) -> f64 {
    pts.par_iter()
        .enumerate()
        .map(|(i, p)| {
            pts.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Steps 2 and 3: chord exits and Finsler/Euclidean ratios at sampled
/// points of the normalized ball.
#[derive(Debug, Clone, Serialize)]
pub struct ChordSurvey {
    /// Max over samples of the nearer chord exit.
    pub chord_bound_max: f64,
    pub chord_witness_point: Vec<f64>,
    pub chord_witness_direction: Vec<f64>,
    pub chord_witness_exit: f64,
    /// Max over directions of the nearer exit at the ball's center.
    pub center_min_exit_max: f64,
    pub lip_upper: f64,
    pub lip_lower: f64,
    /// `max(lip_upper, 1 / lip_lower)`.
    pub c_constant: f64,
}

pub fn chord_survey(
    nb: &NormalizedBall,
    ball: &RadialBall,
    cfg: &Theorem12Config,
) -> Result<ChordSurvey> {
    let body = &nb.mapped_body;
    let n = body.dim();
    let dirs = sphere(n, cfg.step_directions);
    let mut points = vec![nb.mapped_center.clone()];
    for i in 1..cfg.interior_points as u64 {
        let k =
            ((halton(i, 2) * ball.directions.len() as f64) as usize).min(ball.directions.len() - 1);
        let s = halton(i, 3).powf(1.0 / n as f64) * (1.0 - 1e-9);
        let x = &ball.center + &ball.directions[k] * (ball.radii[k] * s);
        points.push(nb.apply(&x));
    }
    type Row = (f64, usize, usize, f64, f64, f64);
    let rows: Vec<Result<Row>> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut worst = (f64::NEG_INFINITY, 0usize, 0.0);
            let (mut up, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
            for (j, v) in dirs.iter().enumerate() {
                let c = body.chord(x, v)?;
                let near = (-c.t_minus).min(c.t_plus);
                if near > worst.0 {
                    worst = (near, j, near);
                }
                let ratio = 0.5 * (1.0 / c.t_plus - 1.0 / c.t_minus);
                up = up.max(ratio);
                lo = lo.min(ratio);
            }
            Ok((worst.0, i, worst.1, worst.2, up, lo))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let center_min_exit_max = rows[0].0;
    let worst = rows
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one point");
    let lip_upper = rows.iter().map(|r| r.4).fold(f64::NEG_INFINITY, f64::max);
    let lip_lower = rows.iter().map(|r| r.5).fold(f64::INFINITY, f64::min);
    Ok(ChordSurvey {
        chord_bound_max: worst.0,
        chord_witness_point: points[worst.1].iter().cloned().collect(),
        chord_witness_direction: dirs[worst.2].iter().cloned().collect(),
        chord_witness_exit: worst.3,
        center_min_exit_max,
        lip_upper,
        lip_lower,
        c_constant: lip_upper.max(1.0 / lip_lower),
    })
}

/// Pass/fail of every bound in a [`Theorem12Report`].
#[derive(Debug, Clone, Serialize)]
pub struct Theorem12Checks {
    pub gap: bool,
    pub center_exit: bool,
    pub chord: bool,
    pub lip_upper: bool,
    pub lip_lower: bool,
    pub ball_diameter: bool,
    pub boundary_norms: bool,
    /// Informative: the normalized ball fits in the `sqrt(n)` dilate.
    pub within_sqrt_n: bool,
}

/// Bound constants used as thresholds.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem12Bounds {
    pub gap: f64,
    pub center_exit: f64,
    pub chord: f64,
    pub lip_upper: f64,
    pub lip_lower: f64,
}

impl Theorem12Bounds {
    pub fn for_dim(n: usize) -> Self {
        Theorem12Bounds {
            gap: gap_bound(),
            center_exit: center_exit_bound(n),
            chord: chord_bound(n),
            lip_upper: lip_upper_bound(),
            lip_lower: lip_lower_bound(n),
        }
    }
}

/// Full bounded-local-geometry certificate at one point.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem12Report {
    pub point: Vec<f64>,
    pub dim: usize,
    /// The ball radius `a`.
    pub a_constant: f64,
    pub gap: GapResult,
    pub survey: ChordSurvey,
    pub boundary_norm_min: f64,
    pub boundary_norm_max: f64,
    /// Largest Hilbert distance between sampled boundary points of the
    /// ball (at most 2 by the triangle inequality).
    pub ball_diameter_max: f64,
    pub bounds: Theorem12Bounds,
    pub checks: Theorem12Checks,
    pub pass: bool,
    pub config: Theorem12Config,
}

/// Builds the radius-1 ball at `p`, normalizes it and checks every bound.
pub fn theorem12_report(
    body: &ConvexBody,
    p: &Point,
    cfg: &Theorem12Config,
) -> Result<Theorem12Report> {
    let n = body.dim();
    let ball = metric_ball(body, p, 1.0, cfg.boundary_directions)?;
    let nb = john_normalize_ball(&ball, cfg.facet_budget)?;
    let gap = step1_gap(&nb)?;
    let survey = chord_survey(&nb, &ball, cfg)?;
    let pts = ball.boundary_points();
    let half = pts.len() / 2;
    let mut diameter: f64 = 0.0;
    for k in (0..half).step_by((half / 64).max(1)) {
        for j in [k + half, (k + half / 3) % pts.len()] {
            diameter = diameter.max(hilbert_distance(body, &pts[k], &pts[j])?);
        }
    }
    let bounds = Theorem12Bounds::for_dim(n);
    let tol = 1e-9;
    let sqrt_n = (n as f64).sqrt();
    let checks = Theorem12Checks {
        gap: gap.d0 >= bounds.gap - tol,
        center_exit: survey.center_min_exit_max <= bounds.center_exit + tol,
        chord: survey.chord_bound_max <= bounds.chord + tol,
        lip_upper: survey.lip_upper <= bounds.lip_upper + tol,
        lip_lower: survey.lip_lower >= bounds.lip_lower - tol,
        ball_diameter: diameter <= 2.0 + 1e-9,
        boundary_norms: nb.boundary_norm_min >= 1.0 - 1e-6
            && nb.boundary_norm_max <= n as f64 + 1e-3,
        within_sqrt_n: nb.boundary_norm_max <= sqrt_n + 1e-3,
    };
    let pass = checks.gap
        && checks.center_exit
        && checks.chord
        && checks.lip_upper
        && checks.lip_lower
        && checks.ball_diameter
        && checks.boundary_norms;
    Ok(Theorem12Report {
        point: p.iter().cloned().collect(),
        dim: n,
        a_constant: 1.0,
        gap,
        survey,
        boundary_norm_min: nb.boundary_norm_min,
        boundary_norm_max: nb.boundary_norm_max,
        ball_diameter_max: diameter,
        bounds,
        checks,
        pass,
        config: *cfg,
    })
}

/// A named body with base points for regression runs.
#[derive(Debug, Clone)]
pub struct SuiteBody {
    pub name: &'static str,
    pub body: ConvexBody,
    pub points: Vec<Point>,
}

fn random_polytope(dim: usize, facets: usize, seed: u64) -> Result<ConvexBody> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::Rng;
    let mut rows = Vec::new();
    let mut offsets = Vec::new();
    // a simplex-like frame guarantees boundedness
    for v in sphere(dim, 2 * dim) {
        rows.push(v);
        offsets.push(1.5);
    }
    for _ in 0..facets {
        let g = DVector::from_fn(dim, |_, _| crate::directions::standard_normal(&mut rng));
        rows.push(g.normalize());
        offsets.push(0.5 + rng.gen::<f64>());
    }
    let a = DMatrix::from_fn(rows.len(), dim, |i, k| rows[i][k]);
    ConvexBody::hpolytope(a, DVector::from_vec(offsets))
}

/// The point at Hilbert distance `r` from `p` along `u`.
pub fn point_at_distance(body: &ConvexBody, p: &Point, u: &Vector, r: f64) -> Result<Point> {
    let u = u.normalize();
    let c = body.chord(p, &u)?;
    Ok(p + &u * radial_parameter(c.t_minus, c.t_plus, r).0)
}

/// Eight regression bodies (disk, square, triangle, needle, random
/// polytopes in dimensions 2 and 3, cylinder, smoothed cylinder), each with
/// five base points including one at Hilbert distance 5 from the interior
/// point.
pub fn regression_suite() -> Result<Vec<SuiteBody>> {
    let tri = {
        let r = 0.5;
        let verts: Vec<Point> = (0..3)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                DVector::from_vec(vec![2.0 * r * a.cos(), 2.0 * r * a.sin()])
            })
            .collect();
        ConvexBody::vpolytope(&verts)?
    };
    let cylinder = ConvexBody::product(vec![
        ConvexBody::unit_ball(2),
        ConvexBody::interval(-1.0, 1.0)?,
    ])?;
    let bodies: Vec<(&'static str, ConvexBody)> = vec![
        ("disk", ConvexBody::unit_ball(2)),
        ("square", ConvexBody::cuboid(&[-1.0, -1.0], &[1.0, 1.0])?),
        ("triangle", tri),
        ("needle", ConvexBody::cuboid(&[-1.0, -0.05], &[1.0, 0.05])?),
        ("random-polytope-2d", random_polytope(2, 9, 11)?),
        ("random-polytope-3d", random_polytope(3, 14, 13)?),
        ("cylinder", cylinder.clone()),
        (
            "smoothed-cylinder",
            ConvexBody::minkowski_ball(cylinder, 0.25)?,
        ),
    ];
    bodies
        .into_iter()
        .map(|(name, body)| {
            let n = body.dim();
            let c = body.interior_point().clone();
            let dir = |k: usize| -> Vector {
                DVector::from_fn(n, |i, _| ((i + 1) as f64 * (k as f64 + 0.7)).sin())
            };
            let points = vec![
                c.clone(),
                point_at_distance(&body, &c, &dir(1), 0.5)?,
                point_at_distance(&body, &c, &dir(2), 1.5)?,
                point_at_distance(&body, &c, &dir(3), 3.0)?,
                point_at_distance(&body, &c, &dir(4), 5.0)?,
            ];
            Ok(SuiteBody { name, body, points })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn ray_exit_matches_bisection() {
        let tri =
            ConvexBody::vpolytope(&[v(&[1.0, 0.0]), v(&[-0.5, 0.8]), v(&[-0.5, -0.8])]).unwrap();
        let c = v(&[0.6, 0.1]);
        let ball = metric_ball(&tri, &c, 1.5, 64).unwrap();
        let from = v(&[0.62, 0.09]);
        for k in 0..24 {
            let a = 0.26 * k as f64;
            let dir = v(&[a.cos(), a.sin()]) * 0.3;
            let t = ball.ray_exit(&from, &dir).unwrap();
            let (mut lo, mut hi) = (0.0, tri.chord(&from, &dir).unwrap().t_plus);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let x = &from + &dir * mid;
                if hilbert_distance(&tri, &c, &x).is_ok_and(|d| d < 1.5) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((t - lo).abs() < 1e-10 * lo, "{t} {lo}");
            assert!(ball.contains_point(&(&from + &dir * t)));
        }
    }

    #[test]
    fn disk_ball_is_round() {
        let disk = ConvexBody::unit_ball(2);
        let b = metric_ball(&disk, &v(&[0.0, 0.0]), 1.0, 64).unwrap();
        for r in &b.radii {
            assert!((r - 1f64.tanh()).abs() < 1e-12);
        }
        assert!(b.convexity_probe().unwrap());
    }

    #[test]
    fn disk_normalization_scales_by_coth_one() {
        let disk = ConvexBody::unit_ball(2);
        let b = metric_ball(&disk, &v(&[0.0, 0.0]), 1.0, 256).unwrap();
        let nb = john_normalize_ball(&b, 128).unwrap();
        assert!(
            (nb.map[(0, 0)] - 1.0 / 1f64.tanh()).abs() < 1e-4,
            "{}",
            nb.map
        );
        assert!(nb.map[(0, 1)].abs() < 1e-6);
        let gap = step1_gap(&nb).unwrap();
        assert!(
            (gap.d0 - (1.0 / 1f64.tanh() - 1.0)).abs() < 1e-3,
            "{}",
            gap.d0
        );
    }

    #[test]
    fn constants() {
        assert!((gap_bound() - 0.0090744).abs() < 1e-6);
        assert!((chord_bound(2) - 668.25).abs() < 0.01);
        assert!((chord_bound(3) - 1000.4).abs() < 0.05);
    }
}
