//! Tangent unit balls, the Hilbert (Busemann) density and Monte-Carlo
//! integration against it.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::ConvexBody;
use crate::directions::{circle, sphere, sphere_area, standard_normal};
use crate::error::{GeometryError, Result};
use crate::john::ConvexRegion;
use crate::metric::{dual_norm_in_frame, finsler_norm, Covector, LocalFrame};
use crate::numeric::CompensatedSum;
use crate::{Point, Vector};

/// Volume `omega_n` of the Euclidean unit ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0);
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => {
            for k in 2..=n {
                let next = prev * 2.0 * PI / k as f64;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// A Monte-Carlo (or refinement-based) estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// `h = omega_n / vol(TB)` at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityValue {
    pub point: Vec<f64>,
    pub h: f64,
    pub tub_volume: f64,
    pub stderr: f64,
}

/// How the Euclidean volume of a tangent unit ball is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeMethod {
    /// Inscribed polygon on `resolution` equally spaced directions with
    /// Richardson extrapolation (n = 2 only).
    Polygon { resolution: usize },
    /// `(|S^{n-1}| / N) sum r^n / n` over a spherical direction set.
    Quadrature { resolution: usize },
    /// Stratified hit-or-miss over a bounding box.
    MonteCarlo { samples: usize, seed: u64 },
}

impl VolumeMethod {
    /// Deterministic default used inside integrals.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            2 => VolumeMethod::Polygon { resolution: 256 },
            _ => VolumeMethod::Quadrature { resolution: 512 },
        }
    }
}

/// The tangent unit ball `{u : ||u||_p < 1}` sampled along a deterministic
/// direction set.
#[derive(Debug, Clone)]
pub struct TangentUnitBall {
    body: ConvexBody,
    frame: LocalFrame,
    directions: Vec<Vector>,
    radii: Vec<f64>,
}

impl TangentUnitBall {
    /// Samples the radial function `r(v) = 1 / ||v||_p` on `resolution`
    /// unit directions.
    pub fn new(body: &ConvexBody, p: &Point, resolution: usize) -> Result<Self> {
        let n = body.dim();
        let min = match n {
            1 => 2,
            2 => 16,
            3 => 128,
            _ => 16 * n * n,
        };
        if resolution < min && n <= 3 {
            return Err(GeometryError::InvalidArgument(format!(
                "tangent ball resolution must be at least {min} in dimension {n}"
            )));
        }
        let frame = LocalFrame::at(body, p)?;
        let directions = sphere(n, resolution.max(min));
        let radii = directions
            .iter()
            .map(|v| Ok(1.0 / finsler_norm(body, p, v)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(TangentUnitBall {
            body: body.clone(),
            frame,
            directions,
            radii,
        })
    }

    pub fn base_point(&self) -> &Point {
        &self.frame.point
    }

    pub fn frame(&self) -> &LocalFrame {
        &self.frame
    }

    pub fn directions(&self) -> &[Vector] {
        &self.directions
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `1 / ||v||_p` for a unit vector `v`, evaluated exactly.
    pub fn radius_along(&self, v: &Vector) -> Result<f64> {
        Ok(1.0 / finsler_norm(&self.body, &self.frame.point, &v.normalize())?)
    }

    pub fn boundary_points(&self) -> Vec<Vector> {
        self.directions
            .iter()
            .zip(&self.radii)
            .map(|(v, r)| v * *r)
            .collect()
    }

    /// Largest relative difference between `r(v)` and `r(-v)`.
    pub fn reversibility_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (v, r) in self.directions.iter().zip(&self.radii) {
            let back = self.radius_along(&(-v))?;
            worst = worst.max((back - r).abs() / r);
        }
        Ok(worst)
    }

    /// Convexity probe: midpoints of consecutive boundary samples (n = 2)
    /// or convex combinations of random sample triples (n >= 3) must have
    /// norm at most one.
    pub fn convexity_probe(&self) -> Result<bool> {
        let pts = self.boundary_points();
        convexity_probe(&pts, |x| {
            finsler_norm(&self.body, &self.frame.point, x).map(|f| f <= 1.0 + 1e-9)
        })
    }
}

/// Shared convexity probe for radial samples of a star body around the
/// origin of `pts`.
pub(crate) fn convexity_probe(
    pts: &[Vector],
    inside: impl Fn(&Vector) -> Result<bool>,
) -> Result<bool> {
    let n = pts[0].len();
    if n == 2 {
        let mut sorted: Vec<&Vector> = pts.iter().collect();
        sorted.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
        for k in 0..sorted.len() {
            let mid = (sorted[k] + sorted[(k + 1) % sorted.len()]) * 0.5;
            if !inside(&mid)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee);
    for _ in 0..1000 {
        let i = rng.gen_range(0..pts.len());
        let j = rng.gen_range(0..pts.len());
        let k = rng.gen_range(0..pts.len());
        let mut w = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let x = &pts[i] * w[0] + &pts[j] * w[1] + &pts[k] * w[2];
        if !inside(&x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl ConvexRegion for TangentUnitBall {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn anchor(&self) -> Point {
        DVector::zeros(self.body.dim())
    }
    fn support(&self, w: &Vector) -> Result<f64> {
        dual_norm_in_frame(&self.body, &self.frame, &Covector(w.clone()), 64)
    }
    fn ray_exit(&self, from: &Point, dir: &Vector) -> Result<f64> {
        let p = &self.frame.point;
        if from.iter().all(|&c| c == 0.0) {
            return Ok(1.0 / finsler_norm(&self.body, p, dir)?);
        }
        let norm = |t: f64| finsler_norm(&self.body, p, &(from + dir * t));
        if norm(0.0)? >= 1.0 {
            return Err(GeometryError::NotInterior);
        }
        let mut lo = 0.0;
        let mut hi = 1.0 / finsler_norm(&self.body, p, dir)?;
        while norm(hi)? < 1.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if norm(mid)? < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
    fn contains_point(&self, x: &Point) -> bool {
        finsler_norm(&self.body, &self.frame.point, x).is_ok_and(|f| f < 1.0)
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Euclidean volume of the tangent unit ball at `p`: exact polygon area for
/// n = 2 (`resolution` directions), stratified Monte-Carlo for n >= 3.
pub fn tub_volume(
    body: &ConvexBody,
    p: &Point,
    resolution: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let method = match body.dim() {
        2 => VolumeMethod::Polygon { resolution },
        _ => VolumeMethod::MonteCarlo { samples, seed },
    };
    tub_volume_with(body, p, method)
}

/// [`tub_volume`] with an explicit method.
pub fn tub_volume_with(body: &ConvexBody, p: &Point, method: VolumeMethod) -> Result<McEstimate> {
    let frame = LocalFrame::at(body, p)?;
    tub_volume_in_frame(body, &frame, method)
}

/// Tangent-ball volume computed in a given whitening frame.
pub fn tub_volume_in_frame(
    body: &ConvexBody,
    frame: &LocalFrame,
    method: VolumeMethod,
) -> Result<McEstimate> {
    let n = body.dim();
    let radial = |w: &Vector| frame.radial(body, w);
    if n == 1 {
        let e = DVector::from_element(1, 1.0);
        let v = radial(&e)? + radial(&(-e))?;
        return Ok(McEstimate {
            value: v / frame.det,
            stderr: 0.0,
            samples: 2,
            seed: 0,
        });
    }
    let est = match method {
        VolumeMethod::Polygon { resolution } => {
            if n != 2 {
                return Err(GeometryError::InvalidArgument(
                    "polygon areas are two-dimensional".into(),
                ));
            }
            let m = resolution.max(16).next_multiple_of(2);
            let r: Vec<f64> = circle(m).iter().map(radial).collect::<Result<_>>()?;
            let area = |step: usize| -> f64 {
                let k = m / step;
                let mut s = CompensatedSum::default();
                for i in 0..k {
                    s.add(r[i * step] * r[((i + 1) % k) * step]);
                }
                0.5 * (2.0 * PI / k as f64).sin() * s.value()
            };
            let fine = area(1);
            let coarse = area(2);
            McEstimate {
                value: (4.0 * fine - coarse) / 3.0,
                stderr: (fine - coarse).abs() / 3.0,
                samples: m,
                seed: 0,
            }
        }
        VolumeMethod::Quadrature { resolution } => {
            let vol = |count: usize| -> Result<f64> {
                let dirs = sphere(n, count);
                let mut s = CompensatedSum::default();
                for w in &dirs {
                    s.add(radial(w)?.powi(n as i32));
                }
                Ok(sphere_area(n) * s.value() / (n as f64 * dirs.len() as f64))
            };
            let fine = vol(resolution)?;
            let coarse = vol(resolution / 2)?;
            McEstimate {
                value: fine,
                stderr: (fine - coarse).abs(),
                samples: resolution,
                seed: 0,
            }
        }
        VolumeMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(GeometryError::InvalidArgument(
                    "no samples requested".into(),
                ));
            }
            let mut reach: f64 = 0.0;
            for w in sphere(n, 256) {
                reach = reach.max(radial(&w)?);
            }
            let half = 1.25 * reach;
            let per_axis = (64f64.powf(1.0 / n as f64)).floor().max(1.0) as usize;
            let strata = per_axis.pow(n as u32);
            let per = samples.div_ceil(strata).max(2);
            let cell = 2.0 * half / per_axis as f64;
            let box_volume = (2.0 * half).powi(n as i32);
            let hits: Vec<Result<Vec<Vec<f64>>>> = (0..strata)
                .into_par_iter()
                .map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(s as u64);
                    let mut idx = s;
                    let lo: Vec<f64> = (0..n)
                        .map(|_| {
                            let i = idx % per_axis;
                            idx /= per_axis;
                            -half + cell * i as f64
                        })
                        .collect();
                    let mut out = Vec::with_capacity(per);
                    for _ in 0..per {
                        let w = DVector::from_fn(n, |k, _| lo[k] + cell * rng.gen::<f64>());
                        let f = finsler_norm(body, &frame.point, &(&frame.unwhiten * &w))?;
                        out.push(vec![if f < 1.0 { box_volume } else { 0.0 }]);
                    }
                    Ok(out)
                })
                .collect();
            let strat = Stratified::new(hits.into_iter().collect::<Result<Vec<_>>>()?);
            let (value, stderr) = strat.estimate(0);
            McEstimate {
                value,
                stderr,
                samples: strat.samples(),
                seed,
            }
        }
    };
    Ok(McEstimate {
        value: est.value / frame.det,
        stderr: est.stderr / frame.det,
        ..est
    })
}

/// The Hilbert density at `p`.
pub fn hilbert_density(body: &ConvexBody, p: &Point, method: VolumeMethod) -> Result<DensityValue> {
    let frame = LocalFrame::at(body, p)?;
    density_in_frame(body, &frame, method)
}

pub(crate) fn density_in_frame(
    body: &ConvexBody,
    frame: &LocalFrame,
    method: VolumeMethod,
) -> Result<DensityValue> {
    let v = tub_volume_in_frame(body, frame, method)?;
    let h = unit_ball_volume(body.dim()) / v.value;
    Ok(DensityValue {
        point: frame.point.iter().cloned().collect(),
        h,
        tub_volume: v.value,
        stderr: h * v.stderr / v.value,
    })
}

/// Per-stratum samples of several channels, combined as an equal-weight
/// stratified estimator.
#[derive(Debug, Clone)]
pub struct Stratified {
    strata: Vec<Vec<Vec<f64>>>,
}

impl Stratified {
    /// `strata[s][i][c]` is channel `c` of sample `i` in stratum `s`; all
    /// strata carry equal probability mass.
    pub fn new(strata: Vec<Vec<Vec<f64>>>) -> Self {
        Stratified { strata }
    }

    pub fn samples(&self) -> usize {
        self.strata.iter().map(|s| s.len()).sum()
    }

    fn stratum_mean(s: &[Vec<f64>], c: usize) -> f64 {
        let mut acc = CompensatedSum::default();
        for x in s {
            acc.add(x[c]);
        }
        acc.value() / s.len() as f64
    }

    /// Estimate of channel `c`.
    pub fn mean(&self, c: usize) -> f64 {
        let mut acc = CompensatedSum::default();
        for s in self.strata.iter().filter(|s| !s.is_empty()) {
            acc.add(Self::stratum_mean(s, c));
        }
        acc.value() / self.strata.len() as f64
    }

    /// Covariance of the estimators of channels `a` and `b`.
    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        let k = self.strata.len() as f64;
        let mut acc = CompensatedSum::default();
        for s in self.strata.iter().filter(|s| s.len() > 1) {
            let ma = Self::stratum_mean(s, a);
            let mb = Self::stratum_mean(s, b);
            let mut c = CompensatedSum::default();
            for x in s {
                c.add((x[a] - ma) * (x[b] - mb));
            }
            let m = s.len() as f64;
            acc.add(c.value() / (m - 1.0) / m);
        }
        acc.value() / (k * k)
    }

    pub fn estimate(&self, c: usize) -> (f64, f64) {
        (self.mean(c), self.covariance(c, c).max(0.0).sqrt())
    }

    /// Ratio of channels `a / b` with a delta-method standard error.
    pub fn ratio(&self, a: usize, b: usize) -> (f64, f64) {
        let na = self.mean(a);
        let nb = self.mean(b);
        let q = na / nb;
        let var = (self.covariance(a, a) - 2.0 * q * self.covariance(a, b)
            + q * q * self.covariance(b, b))
            / (nb * nb);
        (q, var.max(0.0).sqrt())
    }
}

/// Weight of an integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    HilbertDensity,
    Lebesgue,
}

/// A region of integration.
pub trait Domain: Sync {
    fn dim(&self) -> usize;
    fn bounding_box(&self) -> (Point, Point);
    fn contains(&self, x: &Point) -> bool;
}

impl Domain for ConvexBody {
    fn dim(&self) -> usize {
        ConvexBody::dim(self)
    }
    fn bounding_box(&self) -> (Point, Point) {
        ConvexBody::bounding_box(self)
    }
    fn contains(&self, x: &Point) -> bool {
        self.contains_unchecked(x)
    }
}

/// Closed Euclidean ball used as an integration domain.
#[derive(Debug, Clone)]
pub struct EuclideanBall {
    pub center: Point,
    pub radius: f64,
}

impl Domain for EuclideanBall {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn bounding_box(&self) -> (Point, Point) {
        (
            self.center.map(|c| c - self.radius),
            self.center.map(|c| c + self.radius),
        )
    }
    fn contains(&self, x: &Point) -> bool {
        (x - &self.center).norm() <= self.radius
    }
}

/// Largest whitening gain tolerated by integrals: beyond it the tangent ball
/// is smaller than 1e-6 in some direction.
const MAX_WHITENING: f64 = 1e6;

pub(crate) fn guarded_frame(body: &ConvexBody, x: &Point) -> Result<LocalFrame> {
    let frame = LocalFrame::at(body, x)?;
    if frame.whiten.norm() > MAX_WHITENING {
        return Err(GeometryError::NearBoundary {
            gap: 1.0 / frame.whiten.norm(),
        });
    }
    Ok(frame)
}

/// `int_D f dmu` by stratified uniform proposals on the bounding box of `D`,
/// rejecting points outside `D`. The domain must lie inside the body.
pub fn integrate(
    body: &ConvexBody,
    domain: &dyn Domain,
    f: &(dyn Fn(&Point) -> f64 + Sync),
    weight: Weight,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let n = body.dim();
    if domain.dim() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            got: domain.dim(),
        });
    }
    if samples == 0 {
        return Err(GeometryError::InvalidArgument(
            "no samples requested".into(),
        ));
    }
    let (lo, hi) = domain.bounding_box();
    let per_axis = ((samples as f64 / 8.0).powf(1.0 / n as f64).floor() as usize).clamp(1, 32);
    let strata = per_axis.pow(n as u32);
    let per = samples.div_ceil(strata).max(2);
    let width = (&hi - &lo) / per_axis as f64;
    let box_volume: f64 = (&hi - &lo).iter().product();
    let method = VolumeMethod::default_for(n);
    let parts: Vec<Result<(Vec<Vec<f64>>, usize)>> = (0..strata)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut idx = s;
            let corner = DVector::from_fn(n, |k, _| {
                let i = idx % per_axis;
                idx /= per_axis;
                lo[k] + width[k] * i as f64
            });
            let mut out = Vec::with_capacity(per);
            let mut accepted = 0;
            for _ in 0..per {
                let x = DVector::from_fn(n, |k, _| corner[k] + width[k] * rng.gen::<f64>());
                if !domain.contains(&x) {
                    out.push(vec![0.0]);
                    continue;
                }
                if !body.contains_unchecked(&x) {
                    return Err(GeometryError::InvalidArgument(
                        "integration domain is not inside the body".into(),
                    ));
                }
                accepted += 1;
                let w = match weight {
                    Weight::Lebesgue => 1.0,
                    Weight::HilbertDensity => {
                        let frame = guarded_frame(body, &x)?;
                        density_in_frame(body, &frame, method)?.h
                    }
                };
                out.push(vec![box_volume * f(&x) * w]);
            }
            Ok((out, accepted))
        })
        .collect();
    let mut strata_values = Vec::with_capacity(strata);
    let mut accepted = 0;
    for part in parts {
        let (vals, a) = part?;
        accepted += a;
        strata_values.push(vals);
    }
    if accepted == 0 {
        return Err(GeometryError::Sampling(
            "every proposal was rejected".into(),
        ));
    }
    let strat = Stratified::new(strata_values);
    let (value, stderr) = strat.estimate(0);
    Ok(McEstimate {
        value,
        stderr,
        samples: strat.samples(),
        seed,
    })
}

/// A sample of the annulus `r_in <= rho <= r_out` around a center, in polar
/// coordinates for the Hilbert distance.
#[derive(Debug, Clone)]
pub struct PolarSample {
    pub point: Point,
    /// Hilbert distance to the center.
    pub rho: f64,
    /// Unit direction from the center.
    pub direction: Vector,
    /// Lebesgue Jacobian times the total parameter measure: the sample mean
    /// of `jacobian * F` estimates `int F dvol` over the annulus.
    pub jacobian: f64,
}

/// Euclidean parameter `t` of the point at Hilbert distance `rho` from the
/// center along a unit direction whose chord is `(tm, tp)`, and `dt/drho`.
pub fn radial_parameter(tm: f64, tp: f64, rho: f64) -> (f64, f64) {
    let e = (2.0 * rho).exp() * (-tm) / tp;
    let len = tp - tm;
    let t = tp - len / (1.0 + e);
    let dt = 2.0 * len / (e + 2.0 + 1.0 / e);
    (t, dt)
}

/// Stratified samples of a metric annulus: strata split the distance range
/// and the sphere of directions into cells of equal probability; the result
/// holds one vector of samples per stratum.
pub fn polar_samples(
    body: &ConvexBody,
    center: &Point,
    r_in: f64,
    r_out: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<PolarSample>>> {
    let n = body.dim();
    body.check_dim(center)?;
    if !body.contains_unchecked(center) {
        return Err(GeometryError::NotInterior);
    }
    if !(r_out > r_in && r_in >= 0.0) {
        return Err(GeometryError::InvalidArgument(
            "empty distance range".into(),
        ));
    }
    if samples == 0 {
        return Err(GeometryError::InvalidArgument(
            "no samples requested".into(),
        ));
    }
    let cells = (samples / 4).max(1);
    // (radial, first angular, second angular) cell counts
    let (kr, ka, kb) = match n {
        1 => ((cells / 2).max(1), 2, 1),
        2 => {
            let k = (cells as f64).sqrt().floor().max(1.0) as usize;
            (k, k, 1)
        }
        3 => {
            let k = (cells as f64).cbrt().floor().max(1.0) as usize;
            (k, k, k)
        }
        _ => (cells, 1, 1),
    };
    let strata = kr * ka * kb;
    let per = samples.div_ceil(strata).max(2);
    let measure = sphere_area(n) * (r_out - r_in);
    (0..strata)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let ir = s % kr;
            let ia = (s / kr) % ka;
            let ib = s / (kr * ka);
            let mut out = Vec::with_capacity(per);
            for _ in 0..per {
                let rho = r_in + (r_out - r_in) * (ir as f64 + rng.gen::<f64>()) / kr as f64;
                let u = match n {
                    1 => DVector::from_element(1, if ia == 0 { 1.0 } else { -1.0 }),
                    2 => {
                        let a = 2.0 * PI * (ia as f64 + rng.gen::<f64>()) / ka as f64;
                        DVector::from_vec(vec![a.cos(), a.sin()])
                    }
                    3 => {
                        let z = -1.0 + 2.0 * (ia as f64 + rng.gen::<f64>()) / ka as f64;
                        let phi = 2.0 * PI * (ib as f64 + rng.gen::<f64>()) / kb as f64;
                        let r = (1.0 - z * z).max(0.0).sqrt();
                        DVector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
                    }
                    _ => loop {
                        let g = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
                        let norm = g.norm();
                        if norm > 1e-9 {
                            break g / norm;
                        }
                    },
                };
                let c = body.chord(center, &u)?;
                let (t, dt) = radial_parameter(c.t_minus, c.t_plus, rho);
                out.push(PolarSample {
                    point: center + &u * t,
                    rho,
                    direction: u,
                    jacobian: measure * t.powi(n as i32 - 1) * dt,
                });
            }
            Ok(out)
        })
        .collect()
}

/// Hilbert measure of the metric annulus `r_in <= d(center, .) <= r_out`.
pub fn annulus_measure(
    body: &ConvexBody,
    center: &Point,
    r_in: f64,
    r_out: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let strata = polar_samples(body, center, r_in, r_out, samples, seed)?;
    let method = VolumeMethod::default_for(body.dim());
    let values: Vec<Result<Vec<Vec<f64>>>> = strata
        .par_iter()
        .map(|s| {
            s.iter()
                .map(|x| {
                    let frame = LocalFrame::at(body, &x.point)?;
                    let h = density_in_frame(body, &frame, method)?.h;
                    Ok(vec![x.jacobian * h])
                })
                .collect()
        })
        .collect();
    let strat = Stratified::new(values.into_iter().collect::<Result<Vec<_>>>()?);
    let (value, stderr) = strat.estimate(0);
    Ok(McEstimate {
        value,
        stderr,
        samples: strat.samples(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn omega_values() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn klein_density() {
        let disk = ConvexBody::unit_ball(2);
        for r in [0.0, 0.5, 0.9, 0.95] {
            let d = hilbert_density(
                &disk,
                &v(&[r, 0.0]),
                VolumeMethod::Polygon { resolution: 256 },
            )
            .unwrap();
            let exact = (1.0 - r * r).powf(-1.5);
            assert!((d.h / exact - 1.0).abs() < 1e-6, "{r}: {} vs {exact}", d.h);
        }
    }

    #[test]
    fn ball_3d_volume_by_all_methods() {
        let b = ConvexBody::unit_ball(3);
        let p = v(&[0.3, 0.0, 0.2]);
        let r2: f64 = 0.13;
        let exact = 4.0 * PI / 3.0 * (1.0 - r2).powf(2.0);
        let q = tub_volume_with(&b, &p, VolumeMethod::Quadrature { resolution: 1024 }).unwrap();
        assert!((q.value / exact - 1.0).abs() < 1e-3, "{} {exact}", q.value);
        let mc = tub_volume(&b, &p, 0, 20_000, 1).unwrap();
        assert!(
            (mc.value - exact).abs() < 4.0 * mc.stderr + 1e-3,
            "{} {exact} {}",
            mc.value,
            mc.stderr
        );
    }

    #[test]
    fn radial_parameter_inverts_distance() {
        let disk = ConvexBody::unit_ball(2);
        let (t, _) = radial_parameter(-1.0, 1.0, 1.0);
        assert!((t - 1f64.tanh()).abs() < 1e-15);
        let c = v(&[0.2, 0.1]);
        let u = v(&[0.6, 0.8]);
        let ch = disk.chord(&c, &u).unwrap();
        let (t, dt) = radial_parameter(ch.t_minus, ch.t_plus, 2.5);
        let d = crate::metric::hilbert_distance(&disk, &c, &(&c + &u * t)).unwrap();
        assert!((d - 2.5).abs() < 1e-12);
        let (t2, _) = radial_parameter(ch.t_minus, ch.t_plus, 2.5 + 1e-6);
        assert!(((t2 - t) / 1e-6 - dt).abs() < 1e-6);
    }

    #[test]
    fn hyperbolic_disk_area() {
        let disk = ConvexBody::unit_ball(2);
        let m = annulus_measure(&disk, &v(&[0.0, 0.0]), 0.0, 1.0, 4000, 5).unwrap();
        let exact = 2.0 * PI * (1f64.cosh() - 1.0);
        assert!(
            (m.value - exact).abs() < 1e-3 * exact,
            "{} {exact}",
            m.value
        );
    }

    #[test]
    fn stratified_ratio_of_proportional_channels_is_exact() {
        let s = Stratified::new(vec![
            vec![vec![2.0, 1.0], vec![4.0, 2.0]],
            vec![vec![6.0, 3.0], vec![1.0, 0.5]],
        ]);
        let (q, se) = s.ratio(0, 1);
        assert!((q - 2.0).abs() < 1e-15);
        assert!(se < 1e-12);
    }
}
