//! Maximum-volume inscribed ellipsoids.
//!
//! Polytopes are handled directly by a barrier method on the log-det
//! problem. Any other convex region (smooth bodies, tangent unit balls,
//! metric balls) goes through an outer polytope built from support values;
//! the resulting ellipsoid is then shrunk by a ray-probe certificate so that
//! it lies inside the region.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::body::{chebyshev_center, BodyKind, ConvexBody};
use crate::directions::{covering_angle, nested_sphere, sphere, tangent_basis};
use crate::error::{GeometryError, Result};
use crate::measure::unit_ball_volume;
use crate::metric::finsler_norm;
use crate::numeric::{golden_max, sym_apply, sym_extremes};
use crate::{Point, Vector};

/// `{x : (x - c)^T M (x - c) < 1}`, stored together with the symmetric
/// factor `B = M^{-1/2}` so that the ellipsoid is `c + B (unit ball)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: Point,
    pub shape: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(center: Point, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if shape.shape() != (n, n) {
            return Err(GeometryError::invalid_body("shape", "dimension mismatch"));
        }
        let shape = (&shape + shape.transpose()) * 0.5;
        if sym_extremes(&shape).0 <= 0.0 {
            return Err(GeometryError::invalid_body(
                "shape",
                "matrix is not positive definite",
            ));
        }
        let factor = sym_apply(&shape, |x| 1.0 / x.sqrt());
        Ok(Ellipsoid {
            center,
            shape,
            factor,
        })
    }

    /// `c + B (unit ball)` for a symmetric positive definite `B`.
    pub fn from_factor(center: Point, factor: DMatrix<f64>) -> Result<Self> {
        let factor = (&factor + factor.transpose()) * 0.5;
        if sym_extremes(&factor).0 <= 0.0 {
            return Err(GeometryError::NoConvergence(
                "degenerate ellipsoid factor".into(),
            ));
        }
        let shape = sym_apply(&factor, |x| 1.0 / (x * x));
        Ok(Ellipsoid {
            center,
            shape,
            factor,
        })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Ellipsoid {
            center: DVector::zeros(dim),
            shape: DMatrix::identity(dim, dim),
            factor: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// The symmetric factor `B` with `E = c + B (unit ball)`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.factor.determinant().abs()
    }

    pub fn contains(&self, x: &Point) -> bool {
        let d = x - &self.center;
        d.dot(&(&self.shape * &d)) < 1.0
    }

    /// `v^T M v`.
    pub fn inner(&self, v: &Vector) -> f64 {
        v.dot(&(&self.shape * v))
    }

    /// The boundary point `c + B u / |u|`.
    pub fn boundary_point(&self, u: &Vector) -> Point {
        &self.center + &self.factor * u.normalize()
    }

    /// Homothety of ratio `lambda` about the center.
    pub fn dilate(&self, lambda: f64) -> Self {
        Ellipsoid {
            center: self.center.clone(),
            shape: &self.shape / (lambda * lambda),
            factor: &self.factor * lambda,
        }
    }

    /// `{A x + s : x in E}`.
    pub fn affine_image(&self, map: &DMatrix<f64>, shift: &Vector) -> Result<Self> {
        let ab = map * &self.factor;
        let cov = &ab * ab.transpose();
        Self::from_factor(
            map * &self.center + shift,
            sym_apply(&cov, |x| x.max(0.0).sqrt()),
        )
    }

    pub fn to_body(&self) -> Result<ConvexBody> {
        ConvexBody::ellipsoid(self.center.clone(), self.shape.clone())
    }
}

/// A convex region known through its support function and ray exits.
pub trait ConvexRegion: Sync {
    fn dim(&self) -> usize;
    /// A point in the interior.
    fn anchor(&self) -> Point;
    fn support(&self, w: &Vector) -> Result<f64>;
    /// Parameter `t > 0` at which `from + t dir` leaves the region; `from`
    /// must be interior.
    fn ray_exit(&self, from: &Point, dir: &Vector) -> Result<f64>;
    fn contains_point(&self, x: &Point) -> bool;
    fn is_symmetric(&self) -> bool;
    /// Outward normal of a supporting hyperplane where the ray leaves the
    /// region, when one is cheaply available.
    fn exit_normal(&self, _from: &Point, _dir: &Vector) -> Result<Option<Vector>> {
        Ok(None)
    }
}

impl ConvexRegion for ConvexBody {
    fn dim(&self) -> usize {
        ConvexBody::dim(self)
    }
    fn anchor(&self) -> Point {
        self.interior_point().clone()
    }
    fn support(&self, w: &Vector) -> Result<f64> {
        ConvexBody::support(self, w)
    }
    fn ray_exit(&self, from: &Point, dir: &Vector) -> Result<f64> {
        Ok(self.chord(from, dir)?.t_plus)
    }
    fn contains_point(&self, x: &Point) -> bool {
        self.contains_unchecked(x)
    }
    fn is_symmetric(&self) -> bool {
        self.symmetry_center().is_some()
    }
    fn exit_normal(&self, from: &Point, dir: &Vector) -> Result<Option<Vector>> {
        Ok(Some(self.chord_detail(from, dir)?.normal_plus))
    }
}

/// Maximum-volume ellipsoid inside `{x : a_i . x <= b_i}` (unit `a_i`),
/// started from the strictly interior point `start`. With `pinned`, the
/// center is held at `start`.
pub fn max_volume_inscribed(
    normals: &[Vector],
    offsets: &[f64],
    start: &Point,
    pinned: bool,
) -> Result<Ellipsoid> {
    let n = start.len();
    let m = normals.len();
    let recentered;
    let start = if pinned {
        start
    } else {
        let a = DMatrix::from_fn(m, n, |i, j| normals[i][j]);
        let off = DVector::from_column_slice(offsets);
        match chebyshev_center(&a, &off) {
            Ok((c, r)) if r > 0.0 => {
                recentered = c;
                &recentered
            }
            _ => start,
        }
    };
    let mut slack: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let s = offsets[i] - normals[i].dot(start);
        if s.is_nan() || s <= 0.0 {
            return Err(GeometryError::NotInterior);
        }
        slack.push(s);
    }
    let scale = slack.iter().cloned().fold(0.0, f64::max);
    let b: Vec<f64> = slack.iter().map(|s| s / scale).collect();
    let bmin = b.iter().cloned().fold(f64::INFINITY, f64::min);

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
    let nb = pairs.len();
    let nv = if pinned { nb } else { nb + n };

    let unpack = |z: &DVector<f64>| -> (DMatrix<f64>, DVector<f64>) {
        let mut bm = DMatrix::zeros(n, n);
        for (idx, &(j, k)) in pairs.iter().enumerate() {
            bm[(j, k)] = z[idx];
            bm[(k, j)] = z[idx];
        }
        let c = if pinned {
            DVector::zeros(n)
        } else {
            z.rows(nb, n).into_owned()
        };
        (bm, c)
    };
    // Column `idx` of the Jacobian of B a with respect to the B entries.
    let jac = |a: &Vector| -> DMatrix<f64> {
        let mut jm = DMatrix::zeros(n, nb);
        for (idx, &(j, k)) in pairs.iter().enumerate() {
            if j == k {
                jm[(j, idx)] = a[j];
            } else {
                jm[(j, idx)] = a[k];
                jm[(k, idx)] = a[j];
            }
        }
        jm
    };
    let jacs: Vec<DMatrix<f64>> = normals.iter().map(jac).collect();

    let value = |z: &DVector<f64>, t: f64| -> Option<f64> {
        let (bm, c) = unpack(z);
        let chol = bm.clone().cholesky()?;
        let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let mut f = -t * logdet;
        for i in 0..m {
            let slack = b[i] - normals[i].dot(&c);
            let psi = slack * slack - (&bm * &normals[i]).norm_squared();
            if !(slack > 0.0 && psi > 0.0) {
                return None;
            }
            f -= psi.ln();
        }
        Some(f)
    };

    let jtj: Vec<DMatrix<f64>> = jacs.iter().map(|jm| jm.transpose() * jm).collect();

    let derivatives = |z: &DVector<f64>, t: f64| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (bm, c) = unpack(z);
        let q = bm
            .clone()
            .try_inverse()
            .ok_or_else(|| GeometryError::NoConvergence("singular iterate".into()))?;
        let mut g = DVector::zeros(nv);
        let mut h = DMatrix::zeros(nv, nv);
        let basis = |idx: usize| -> DMatrix<f64> {
            let (j, k) = pairs[idx];
            let mut e = DMatrix::zeros(n, n);
            e[(j, k)] = 1.0;
            e[(k, j)] = 1.0;
            e
        };
        let qe: Vec<DMatrix<f64>> = (0..nb).map(|a| &q * basis(a)).collect();
        for a in 0..nb {
            g[a] -= t * qe[a].trace();
            for bb in a..nb {
                let v = t * (&qe[a] * &qe[bb]).trace();
                h[(a, bb)] += v;
                if a != bb {
                    h[(bb, a)] += v;
                }
            }
        }
        // barrier -log((b - a.c)^2 - |B a|^2) of the second-order cone
        let mut y = DVector::zeros(n);
        let mut grad = DVector::zeros(nv);
        let mut gb = DVector::zeros(nb);
        for i in 0..m {
            let a = &normals[i];
            y.gemv(1.0, &bm, a, 0.0);
            let slack = b[i] - a.dot(&c);
            let psi = slack * slack - y.norm_squared();
            for (idx, &(j, k)) in pairs.iter().enumerate() {
                gb[idx] = if j == k {
                    y[j] * a[j]
                } else {
                    y[j] * a[k] + y[k] * a[j]
                };
                grad[idx] = -2.0 * gb[idx];
            }
            if !pinned {
                for j in 0..n {
                    grad[nb + j] = -2.0 * slack * a[j];
                }
            }
            g.axpy(-1.0 / psi, &grad, 1.0);
            h.ger(1.0 / (psi * psi), &grad, &grad, 1.0);
            let w = 2.0 / psi;
            h.view_mut((0, 0), (nb, nb))
                .zip_apply(&jtj[i], |x, v| *x += w * v);
            if !pinned {
                h.view_mut((nb, nb), (n, n)).ger(-w, a, a, 1.0);
            }
        }
        Ok((g, h))
    };

    let mut z = DVector::zeros(nv);
    for (idx, &(j, k)) in pairs.iter().enumerate() {
        if j == k {
            z[idx] = 0.9 * bmin;
        }
    }
    let mut t = 1.0;
    let gap_target = 1e-10;
    for _outer in 0..200 {
        for _inner in 0..200 {
            let (g, h) = derivatives(&z, t)?;
            let step = match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    let reg = &h + DMatrix::identity(nv, nv) * (1e-12 * h.amax());
                    reg.lu()
                        .solve(&(-&g))
                        .ok_or_else(|| GeometryError::NoConvergence("Newton system".into()))?
                }
            };
            let decrement = -g.dot(&step);
            // suboptimality in log det is about decrement / (2 t)
            if decrement / 2.0 < 1e-8 {
                break;
            }
            let f0 = value(&z, t)
                .ok_or_else(|| GeometryError::NoConvergence("lost feasibility".into()))?;
            let mut s = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let cand = &z + &step * s;
                if let Some(f) = value(&cand, t) {
                    if f <= f0 - 0.25 * s * decrement && f < f0 {
                        z = cand;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if 2.0 * m as f64 / t < gap_target {
            break;
        }
        t *= 20.0;
    }
    let (bm, c) = unpack(&z);
    let center = start + c * scale;
    Ellipsoid::from_factor(center, bm * scale)
}

/// Minimum ray exit from the center along `B u` over a covering direction
/// set, deflated by the cosine of the covering angle: the ellipsoid dilated
/// by this factor lies in the region.
fn certified_scale(region: &dyn ConvexRegion, e: &Ellipsoid, probes: usize) -> Result<f64> {
    let n = region.dim();
    let delta = covering_angle(n, probes).ok_or_else(|| {
        GeometryError::Unsupported("certified shrink is available in dimensions 1 to 3".into())
    })?;
    if !region.contains_point(&e.center) {
        return Ok(0.0);
    }
    let mut lo = f64::INFINITY;
    for u in sphere(n, probes) {
        lo = lo.min(region.ray_exit(&e.center, &(e.factor() * u))?);
    }
    Ok(lo * delta.cos() * (1.0 - 1e-12))
}

fn verify_containment(region: &dyn ConvexRegion, e: &Ellipsoid) -> Result<()> {
    let n = region.dim();
    for u in sphere(n, 1000) {
        let x = &e.center + e.factor() * u * (1.0 - 1e-9);
        if !region.contains_point(&x) {
            return Err(GeometryError::ContainmentFailure(format!(
                "ellipsoid boundary sample {:?} lies outside the body",
                x.as_slice()
            )));
        }
    }
    Ok(())
}

/// `region` seen through `x -> L^{-1} (x - c)`.
struct Framed<'a> {
    region: &'a dyn ConvexRegion,
    center: Point,
    map: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Framed<'_> {
    fn lift(&self, x: &Point) -> Point {
        &self.center + &self.map * x
    }
}

impl ConvexRegion for Framed<'_> {
    fn dim(&self) -> usize {
        self.region.dim()
    }
    fn anchor(&self) -> Point {
        &self.inverse * (self.region.anchor() - &self.center)
    }
    fn support(&self, w: &Vector) -> Result<f64> {
        let pulled = self.inverse.transpose() * w;
        let s = pulled.norm();
        Ok(s * self.region.support(&(pulled / s))? - w.dot(&(&self.inverse * &self.center)))
    }
    fn ray_exit(&self, from: &Point, dir: &Vector) -> Result<f64> {
        self.region.ray_exit(&self.lift(from), &(&self.map * dir))
    }
    fn contains_point(&self, x: &Point) -> bool {
        self.region.contains_point(&self.lift(x))
    }
    fn is_symmetric(&self) -> bool {
        self.region.is_symmetric()
    }
    fn exit_normal(&self, from: &Point, dir: &Vector) -> Result<Option<Vector>> {
        let normal = self
            .region
            .exit_normal(&self.lift(from), &(&self.map * dir))?;
        Ok(normal.map(|m| self.map.transpose() * m))
    }
}

const CUT_ROUNDS: usize = 8;
const CUT_TOLERANCE: f64 = 1e-6;

fn certification_probes(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 4096,
        _ => 20_000,
    }
}

fn coarse_probes(n: usize) -> usize {
    (certification_probes(n) / 8).max(2)
}

/// Outer-polytope ellipsoid for `k` support directions, tightened by up to
/// `cut_rounds` rounds of supporting halfspaces at the worst ray exits, and
/// its coarse shrink factor.
fn support_pass(
    region: &dyn ConvexRegion,
    k: usize,
    pinned: bool,
    cut_rounds: usize,
) -> Result<Option<(Ellipsoid, f64)>> {
    let n = region.dim();
    let dirs = nested_sphere(n, k);
    let mut offsets = Vec::with_capacity(k);
    for w in &dirs {
        offsets.push(region.support(w)?);
    }
    let Ok(mut outer) = max_volume_inscribed(&dirs, &offsets, &region.anchor(), pinned) else {
        return Ok(None);
    };
    let (mut dirs, mut offsets) = (dirs, offsets);
    let probes = sphere(n, coarse_probes(n));
    let per_round = (k / 8).max(2 * n);
    for _ in 0..cut_rounds {
        if !region.contains_point(&outer.center) {
            break;
        }
        let mut exits = Vec::with_capacity(probes.len());
        for (i, u) in probes.iter().enumerate() {
            let t = region.ray_exit(&outer.center, &(outer.factor() * u))?;
            if t < 1.0 - CUT_TOLERANCE {
                exits.push((t, i));
            }
        }
        if exits.is_empty() {
            break;
        }
        exits.sort_by(|a, b| a.0.total_cmp(&b.0));
        let inverse_t = match outer.factor().clone().try_inverse() {
            Some(m) => m.transpose(),
            None => break,
        };
        for &(t, i) in exits.iter().take(per_round) {
            let dir = outer.factor() * &probes[i];
            let w = match region.exit_normal(&outer.center, &dir)? {
                Some(m) if m.norm() > 0.0 => m,
                _ => &inverse_t * &probes[i],
            };
            let w = w.normalize();
            let exit = &outer.center + &dir * t;
            offsets.push(region.support(&w)?.max(w.dot(&exit)));
            dirs.push(w);
        }
        match max_volume_inscribed(&dirs, &offsets, &region.anchor(), pinned) {
            Ok(e) if region.contains_point(&e.center) => outer = e,
            _ => break,
        }
    }
    let lambda = certified_scale(region, &outer, coarse_probes(n))?.min(1.0);
    Ok((lambda > 0.0).then_some((outer, lambda)))
}

/// Uncertified John estimate of `region`: an outer ellipsoid and a coarse
/// shrink factor, refined in the frame of the previous estimate.
pub(crate) fn john_estimate(
    region: &dyn ConvexRegion,
    budget: usize,
    pinned: bool,
    refine: bool,
) -> Result<(Ellipsoid, f64)> {
    let n = region.dim();
    let mut k = budget;
    let mut found = None;
    while found.is_none() && k >= 2 * n + 2 {
        found = support_pass(region, k, pinned, 0)?;
        k /= 2;
    }
    let (mut outer, mut lambda) = found.ok_or_else(|| {
        GeometryError::NoConvergence("no facet budget produced a bounded polytope".into())
    })?;
    for _ in 0..6 {
        let Some((e, l)) = framed_pass(region, &outer, lambda, budget, pinned, 0)? else {
            break;
        };
        let gain = volume(&e, l) / volume(&outer, lambda);
        if gain > 1.0 {
            outer = e;
            lambda = l;
        }
        if gain < 1.0 + 1e-6 {
            break;
        }
    }
    if refine {
        return refine_with_cuts(region, outer, lambda, budget, pinned);
    }
    Ok((outer, lambda))
}

fn volume(e: &Ellipsoid, lambda: f64) -> f64 {
    e.volume() * lambda.powi(e.dim() as i32)
}

/// A support pass in the frame of `outer` dilated by `lambda`, mapped back.
fn framed_pass(
    region: &dyn ConvexRegion,
    outer: &Ellipsoid,
    lambda: f64,
    budget: usize,
    pinned: bool,
    cut_rounds: usize,
) -> Result<Option<(Ellipsoid, f64)>> {
    let frame = outer.dilate(lambda);
    let map = frame.factor().clone();
    let Some(inverse) = map.clone().try_inverse() else {
        return Ok(None);
    };
    let framed = Framed {
        region,
        center: frame.center.clone(),
        map: map.clone(),
        inverse,
    };
    let Some((e, l)) = support_pass(&framed, budget, pinned, cut_rounds)? else {
        return Ok(None);
    };
    // the shrink factor is affine invariant
    Ok(Some((e.affine_image(&map, &frame.center)?, l)))
}

/// One cutting-plane pass in the frame of the estimate, kept if it gains.
pub(crate) fn refine_with_cuts(
    region: &dyn ConvexRegion,
    outer: Ellipsoid,
    lambda: f64,
    budget: usize,
    pinned: bool,
) -> Result<(Ellipsoid, f64)> {
    match framed_pass(region, &outer, lambda, budget, pinned, CUT_ROUNDS)? {
        Some((e, l)) if volume(&e, l) > volume(&outer, lambda) => Ok((e, l)),
        _ => Ok((outer, lambda)),
    }
}

/// Shrinks `outer` about its center until it provably lies in `region`.
pub(crate) fn certify(region: &dyn ConvexRegion, outer: &Ellipsoid) -> Result<Ellipsoid> {
    let lambda = certified_scale(region, outer, certification_probes(region.dim()))?;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(GeometryError::NoConvergence(
            "outer ellipsoid center left the region".into(),
        ));
    }
    let e = outer.dilate(lambda.min(1.0));
    verify_containment(region, &e)?;
    Ok(e)
}

fn via_support(region: &dyn ConvexRegion, budget: usize, pinned: bool) -> Result<Ellipsoid> {
    let (outer, _) = john_estimate(region, budget, pinned, true)?;
    certify(region, &outer)
}

/// John ellipsoid of a region that is not a polytope, through an outer
/// polytope of `facet_budget` support halfspaces followed by a certified
/// shrink. With `pinned`, the center is held at the region's anchor.
pub fn john_of_region(
    region: &dyn ConvexRegion,
    facet_budget: usize,
    pinned: bool,
) -> Result<Ellipsoid> {
    let n = region.dim();
    if facet_budget < 2 * n + 2 {
        return Err(GeometryError::InvalidArgument(format!(
            "facet budget must be at least {}",
            2 * n + 2
        )));
    }
    via_support(region, facet_budget, pinned)
}

/// The maximum-volume ellipsoid inscribed in `body`.
pub fn john_ellipsoid(body: &ConvexBody, facet_budget: usize) -> Result<Ellipsoid> {
    let n = body.dim();
    if facet_budget < 2 * n + 2 {
        return Err(GeometryError::InvalidArgument(format!(
            "facet budget must be at least {}",
            2 * n + 2
        )));
    }
    let e = match body.kind() {
        BodyKind::Ball { center, radius } => {
            Ellipsoid::from_factor(center.clone(), DMatrix::identity(n, n) * *radius)?
        }
        BodyKind::Ellipsoid { center, shape, .. } => Ellipsoid::new(center.clone(), shape.clone())?,
        BodyKind::HPolytope {
            normals, offsets, ..
        } => {
            let rows: Vec<Vector> = (0..normals.nrows())
                .map(|i| normals.row(i).transpose())
                .collect();
            max_volume_inscribed(&rows, offsets.as_slice(), body.interior_point(), false)?
        }
        BodyKind::Affine {
            map, shift, base, ..
        } => john_ellipsoid(base, facet_budget)?.affine_image(map, shift)?,
        BodyKind::Product { .. } | BodyKind::MinkowskiBall { .. } => {
            via_support(body, facet_budget, false)?
        }
    };
    verify_containment(body, &e)?;
    Ok(e)
}

/// Result of [`sandwich_check`].
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    /// All boundary probes of the ellipsoid lie in the body.
    pub contained: bool,
    /// Smallest dilation of the ellipsoid about its center covering the
    /// sampled body.
    pub cover_factor: f64,
    pub symmetric: bool,
    /// The factor checked against.
    pub bound: f64,
    pub within_bound: bool,
    /// Set for non-symmetric bodies whose cover factor exceeds `sqrt(n)`.
    pub exceeds_symmetric_factor: bool,
    /// Boundary direction (in ellipsoid coordinates) realizing the cover
    /// factor.
    pub witness: Vec<f64>,
}

/// Checks `E ⊂ K ⊂ lambda E`. The default bound is `sqrt(n)` for
/// centrally symmetric bodies and `n` otherwise.
pub fn sandwich_check(
    region: &dyn ConvexRegion,
    e: &Ellipsoid,
    claimed_factor: Option<f64>,
) -> Result<SandwichReport> {
    let n = region.dim();
    let contained = verify_containment(region, e).is_ok();
    let exit =
        |u: &Vector| -> Result<f64> { region.ray_exit(&e.center, &(e.factor() * u.normalize())) };
    let dirs = sphere(n, 10_000);
    let mut best = f64::NEG_INFINITY;
    let mut best_u = dirs[0].clone();
    for u in &dirs {
        let t = exit(u)?;
        if t > best {
            best = t;
            best_u = u.clone();
        }
    }
    let mut failure = None;
    if n == 2 {
        let theta = best_u[1].atan2(best_u[0]);
        let span = 2.0 * std::f64::consts::PI / dirs.len() as f64;
        let (a, f) = golden_max(
            |a| {
                exit(&DVector::from_vec(vec![a.cos(), a.sin()])).unwrap_or_else(|err| {
                    failure = Some(err);
                    f64::NEG_INFINITY
                })
            },
            theta - span,
            theta + span,
            1e-13,
            100,
        );
        if f > best {
            best = f;
            best_u = DVector::from_vec(vec![a.cos(), a.sin()]);
        }
    } else if n >= 3 {
        let span = covering_angle(n, dirs.len()).unwrap_or(0.1);
        for _ in 0..3 {
            for t in tangent_basis(&best_u) {
                let base = best_u.clone();
                let (a, f) = golden_max(
                    |a| {
                        exit(&(&base + &t * a.tan())).unwrap_or_else(|err| {
                            failure = Some(err);
                            f64::NEG_INFINITY
                        })
                    },
                    -span,
                    span,
                    1e-12,
                    80,
                );
                if f > best {
                    best = f;
                    best_u = (&base + &t * a.tan()).normalize();
                }
            }
        }
    }
    if let Some(err) = failure {
        return Err(err);
    }
    let symmetric = region.is_symmetric();
    let sqrt_n = (n as f64).sqrt();
    let bound = claimed_factor.unwrap_or(if symmetric { sqrt_n } else { n as f64 });
    Ok(SandwichReport {
        contained,
        cover_factor: best,
        symmetric,
        bound,
        within_bound: best <= bound + 1e-3,
        exceeds_symmetric_factor: !symmetric && best > sqrt_n + 1e-3,
        witness: best_u.iter().cloned().collect(),
    })
}

/// The Riemannian inner product at a point given by the John ellipsoid of
/// the tangent unit ball.
#[derive(Debug, Clone)]
pub struct JohnMetric {
    pub point: Point,
    /// `g(v, v) = v^T inner v`.
    pub inner: DMatrix<f64>,
}

/// Extremes of `||v||^2 / g(v,v)` over sampled directions.
#[derive(Debug, Clone, Serialize)]
pub struct JohnMetricSandwich {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `1/n`: the lower end of the sandwich `(1/n) g <= ||v||^2 <= g`.
    pub lower_bound: f64,
    pub holds: bool,
}

impl JohnMetric {
    pub fn g(&self, v: &Vector) -> f64 {
        v.dot(&(&self.inner * v))
    }

    /// Checks `(1/n) g(v,v) <= ||v||^2 <= g(v,v) + 1e-9` on `directions`
    /// sampled unit vectors.
    pub fn sandwich(&self, body: &ConvexBody, directions: usize) -> Result<JohnMetricSandwich> {
        let n = body.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut holds = true;
        for v in sphere(n, directions) {
            let f = finsler_norm(body, &self.point, &v)?;
            let g = self.g(&v);
            let r = f * f / g;
            lo = lo.min(r);
            hi = hi.max(r);
            holds &= f * f <= g + 1e-9 && f * f >= g / n as f64 - 1e-9;
        }
        Ok(JohnMetricSandwich {
            min_ratio: lo,
            max_ratio: hi,
            lower_bound: 1.0 / n as f64,
            holds,
        })
    }
}

/// The John metric at `p`: the John ellipsoid of the tangent unit ball,
/// centered at the origin.
pub fn john_metric_at(body: &ConvexBody, p: &Point, facet_budget: usize) -> Result<JohnMetric> {
    let tb = crate::measure::TangentUnitBall::new(body, p, 64)?;
    let e = john_of_region(&tb, facet_budget, true)?;
    Ok(JohnMetric {
        point: p.clone(),
        inner: e.shape,
    })
}
