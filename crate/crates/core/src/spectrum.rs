//! Rayleigh, Sobolev and Cheeger quotients of Hilbert geometries, and the
//! cylinder experiment: tangent-ball sandwich, vertical radii and flat caps.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::ConvexBody;
use crate::error::{GeometryError, Result};
use crate::measure::{
    annulus_measure, density_in_frame, polar_samples, tub_volume_with, McEstimate, Stratified,
    VolumeMethod,
};
use crate::metric::{
    distance_gradient, dual_norm_in_frame, finsler_norm, hilbert_distance, Covector, LocalFrame,
};
use crate::numeric::golden_max;
use crate::Point;

/// Radial profile `phi(rho)` of a trial function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// `max(0, 1 - rho / r)`.
    Tent { r: f64 },
    /// `exp(-s rho) max(0, 1 - rho / r)`.
    Exponential { s: f64, r: f64 },
}

impl Profile {
    pub fn radius(&self) -> f64 {
        match *self {
            Profile::Tent { r } | Profile::Exponential { r, .. } => r,
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        match *self {
            Profile::Tent { r } => (1.0 - rho / r).max(0.0),
            Profile::Exponential { s, r } => (-s * rho).exp() * (1.0 - rho / r).max(0.0),
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        if rho >= self.radius() {
            return 0.0;
        }
        match *self {
            Profile::Tent { r } => -1.0 / r,
            Profile::Exponential { s, r } => {
                let e = (-s * rho).exp();
                -s * e * (1.0 - rho / r) - e / r
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Tent { r } => r > 0.0 && r.is_finite(),
            Profile::Exponential { s, r } => r > 0.0 && r.is_finite() && s >= 0.0 && s.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidArgument(format!(
                "invalid trial profile {self:?}"
            )))
        }
    }
}

/// Support of a trial function: the closed metric ball `B(center, radius)`.
#[derive(Debug, Clone, Serialize)]
pub struct Support {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// A Lipschitz function with compact support in a body.
pub trait TrialFunction: Sync {
    fn value(&self, body: &ConvexBody, x: &Point) -> Result<f64>;
    fn gradient(&self, body: &ConvexBody, x: &Point) -> Result<Covector>;
    fn support(&self) -> Support;
    /// Distances from the support center where the function is not smooth.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `x -> scale * phi(d(center, x))`.
#[derive(Debug, Clone)]
pub struct RadialTrial {
    pub center: Point,
    pub profile: Profile,
    pub scale: f64,
}

impl RadialTrial {
    pub fn new(center: Point, profile: Profile) -> Result<Self> {
        profile.validate()?;
        Ok(RadialTrial {
            center,
            profile,
            scale: 1.0,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialTrial {
            scale: self.scale * c,
            ..self.clone()
        }
    }
}

impl TrialFunction for RadialTrial {
    fn value(&self, body: &ConvexBody, x: &Point) -> Result<f64> {
        Ok(self.scale * self.profile.value(hilbert_distance(body, &self.center, x)?))
    }
    fn gradient(&self, body: &ConvexBody, x: &Point) -> Result<Covector> {
        let rho = hilbert_distance(body, &self.center, x)?;
        let d = self.profile.derivative(rho);
        if d == 0.0 {
            return Ok(Covector(DVector::zeros(body.dim())));
        }
        Ok(distance_gradient(body, &self.center, x)?.scale(self.scale * d))
    }
    fn support(&self) -> Support {
        Support {
            center: self.center.iter().cloned().collect(),
            radius: self.profile.radius(),
        }
    }
    fn kinks(&self) -> Vec<f64> {
        vec![0.0, self.profile.radius()]
    }
}

/// Result of a finite-difference gradient check.
#[derive(Debug, Clone, Serialize)]
pub struct GradientCheck {
    pub points: usize,
    pub max_relative_error: f64,
    pub pass: bool,
}

/// Compares `gradient` with centered differences at `points` sampled points
/// of the support, skipping points within `1e-3` of a kink.
pub fn gradient_check(
    body: &ConvexBody,
    f: &dyn TrialFunction,
    points: usize,
    seed: u64,
) -> Result<GradientCheck> {
    let sup = f.support();
    let center = DVector::from_vec(sup.center.clone());
    let kinks = f.kinks();
    let samples: Vec<_> = polar_samples(body, &center, 0.0, sup.radius, points, seed)?
        .into_iter()
        .flatten()
        .filter(|s| kinks.iter().all(|k| (s.rho - k).abs() > 1e-3))
        .collect();
    let errors: Vec<Result<f64>> = samples
        .par_iter()
        .map(|s| {
            let g = f.gradient(body, &s.point)?;
            let scale = s.point.norm().max(1.0);
            let mut fd = DVector::zeros(body.dim());
            for k in 0..body.dim() {
                let h = 1e-6 * scale;
                let mut a = s.point.clone();
                let mut b = s.point.clone();
                a[k] += h;
                b[k] -= h;
                fd[k] = (f.value(body, &a)? - f.value(body, &b)?) / (2.0 * h);
            }
            let norm = g.0.norm();
            Ok(if norm == 0.0 {
                fd.norm()
            } else {
                (&g.0 - fd).norm() / norm
            })
        })
        .collect();
    let errors = errors.into_iter().collect::<Result<Vec<_>>>()?;
    let max = errors.iter().cloned().fold(0.0, f64::max);
    Ok(GradientCheck {
        points: errors.len(),
        max_relative_error: max,
        pass: max < 1e-5,
    })
}

/// A ratio of two Monte-Carlo integrals.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientEstimate {
    pub numerator: f64,
    pub numerator_stderr: f64,
    pub denominator: f64,
    pub denominator_stderr: f64,
    pub quotient: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl QuotientEstimate {
    fn from_strata(strat: &Stratified, seed: u64) -> Result<Self> {
        let (numerator, numerator_stderr) = strat.estimate(0);
        let (denominator, denominator_stderr) = strat.estimate(1);
        if denominator <= 0.0 || !denominator.is_finite() {
            return Err(GeometryError::InvalidArgument(
                "trial function vanishes on its support".into(),
            ));
        }
        let (quotient, stderr) = strat.ratio(0, 1);
        Ok(QuotientEstimate {
            numerator,
            numerator_stderr,
            denominator,
            denominator_stderr,
            quotient,
            stderr,
            samples: strat.samples(),
            seed,
        })
    }
}

/// Sampling parameters shared by the quotient estimators.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuotientConfig {
    pub samples: usize,
    pub seed: u64,
    pub dual_resolution: usize,
}

impl Default for QuotientConfig {
    fn default() -> Self {
        QuotientConfig {
            samples: 8192,
            seed: 42,
            dual_resolution: 64,
        }
    }
}

/// One weighted point of a metric ball: `weight` is the Jacobian times the
/// Hilbert density.
#[derive(Debug, Clone)]
struct WeightedPoint {
    point: Point,
    frame: LocalFrame,
    rho: f64,
    weight: f64,
}

fn weighted_ball(
    body: &ConvexBody,
    center: &Point,
    radius: f64,
    cfg: &QuotientConfig,
) -> Result<Vec<Vec<WeightedPoint>>> {
    let method = VolumeMethod::default_for(body.dim());
    let strata = polar_samples(body, center, 0.0, radius, cfg.samples, cfg.seed)?;
    let out: Vec<Result<Vec<WeightedPoint>>> = strata
        .par_iter()
        .map(|s| {
            s.iter()
                .map(|x| {
                    let frame = LocalFrame::at(body, &x.point)?;
                    let h = density_in_frame(body, &frame, method)?.h;
                    Ok(WeightedPoint {
                        point: x.point.clone(),
                        frame,
                        rho: x.rho,
                        weight: x.jacobian * h,
                    })
                })
                .collect()
        })
        .collect();
    out.into_iter().collect()
}

fn quotient_with(
    body: &ConvexBody,
    f: &dyn TrialFunction,
    cfg: &QuotientConfig,
    power: i32,
) -> Result<QuotientEstimate> {
    let sup = f.support();
    let center = DVector::from_vec(sup.center.clone());
    body.check_dim(&center)?;
    let strata = weighted_ball(body, &center, sup.radius, cfg)?;
    let rows: Vec<Result<Vec<Vec<f64>>>> = strata
        .par_iter()
        .map(|s| {
            s.iter()
                .map(|x| {
                    let v = f.value(body, &x.point)?;
                    let g = f.gradient(body, &x.point)?;
                    let dn = dual_norm_in_frame(body, &x.frame, &g, cfg.dual_resolution)?;
                    Ok(vec![
                        x.weight * dn.powi(power),
                        x.weight * v.abs().powi(power),
                    ])
                })
                .collect()
        })
        .collect();
    let strat = Stratified::new(rows.into_iter().collect::<Result<Vec<_>>>()?);
    QuotientEstimate::from_strata(&strat, cfg.seed)
}

/// `int ||df||*^2 dmu / int f^2 dmu` over the support of `f`.
pub fn rayleigh_quotient(
    body: &ConvexBody,
    f: &dyn TrialFunction,
    cfg: &QuotientConfig,
) -> Result<QuotientEstimate> {
    quotient_with(body, f, cfg, 2)
}

/// `int ||df||* dmu / int |f| dmu` over the support of `f`.
pub fn sobolev_quotient(
    body: &ConvexBody,
    f: &dyn TrialFunction,
    cfg: &QuotientConfig,
) -> Result<QuotientEstimate> {
    quotient_with(body, f, cfg, 1)
}

/// Trial family searched by [`minimize_rayleigh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Tent,
    Exponential,
}

/// One evaluated member of a family.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub profile: Profile,
    pub quotient: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Minimization {
    pub best: TrialRecord,
    pub estimate: QuotientEstimate,
    /// Best quotient for each support radius, in grid order.
    pub per_radius: Vec<TrialRecord>,
    pub evaluations: usize,
}

/// Samples of a ball reused across profiles: the weight, the dual norm of
/// the distance differential and the distance.
struct RadialCache {
    strata: Vec<Vec<(f64, f64, f64)>>,
}

impl RadialCache {
    fn build(body: &ConvexBody, center: &Point, radius: f64, cfg: &QuotientConfig) -> Result<Self> {
        let strata = weighted_ball(body, center, radius, cfg)?;
        let rows: Vec<Result<Vec<(f64, f64, f64)>>> = strata
            .par_iter()
            .map(|s| {
                s.iter()
                    .map(|x| {
                        let g = distance_gradient(body, center, &x.point)?;
                        let dn = dual_norm_in_frame(body, &x.frame, &g, cfg.dual_resolution)?;
                        Ok((x.rho, x.weight, dn))
                    })
                    .collect()
            })
            .collect();
        Ok(RadialCache {
            strata: rows.into_iter().collect::<Result<Vec<_>>>()?,
        })
    }

    fn estimate(&self, profile: &Profile, seed: u64) -> Result<QuotientEstimate> {
        let strata = self
            .strata
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&(rho, w, dn)| {
                        let d = profile.derivative(rho) * dn;
                        let v = profile.value(rho);
                        vec![w * d * d, w * v * v]
                    })
                    .collect()
            })
            .collect();
        QuotientEstimate::from_strata(&Stratified::new(strata), seed)
    }
}

/// Searches a radial trial family centered at `center` over the support
/// radii `radii` (and the decay rate `s` in `[0, 1]` by golden section for
/// the exponential family). The best quotient is an upper bound on the
/// bottom of the spectrum.
pub fn minimize_rayleigh(
    body: &ConvexBody,
    center: &Point,
    family: Family,
    radii: &[f64],
    cfg: &QuotientConfig,
) -> Result<Minimization> {
    if radii.is_empty() {
        return Err(GeometryError::InvalidArgument("empty radius grid".into()));
    }
    let mut per_radius = Vec::with_capacity(radii.len());
    let mut best: Option<(TrialRecord, QuotientEstimate)> = None;
    let mut evaluations = 0;
    for &r in radii {
        Profile::Tent { r }.validate()?;
        let cache = RadialCache::build(body, center, r, cfg)?;
        let (profile, est) = match family {
            Family::Tent => {
                evaluations += 1;
                let p = Profile::Tent { r };
                (p, cache.estimate(&p, cfg.seed)?)
            }
            Family::Exponential => {
                let mut failure = None;
                let (s, _) = golden_max(
                    |s| match cache.estimate(&Profile::Exponential { s, r }, cfg.seed) {
                        Ok(q) if q.quotient.is_finite() => -q.quotient,
                        Ok(_) => f64::NEG_INFINITY,
                        Err(e) => {
                            failure = Some(e);
                            f64::NEG_INFINITY
                        }
                    },
                    0.0,
                    1.0,
                    1e-4,
                    60,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                evaluations += 60;
                let p = Profile::Exponential { s, r };
                (p, cache.estimate(&p, cfg.seed)?)
            }
        };
        let rec = TrialRecord {
            profile,
            quotient: est.quotient,
            stderr: est.stderr,
        };
        if best.as_ref().is_none_or(|b| rec.quotient < b.0.quotient) {
            best = Some((rec.clone(), est));
        }
        per_radius.push(rec);
    }
    let (best, estimate) = best.expect("nonempty grid");
    if !best.quotient.is_finite() {
        return Err(GeometryError::NoConvergence(
            "no finite quotient in the family".into(),
        ));
    }
    Ok(Minimization {
        best,
        estimate,
        per_radius,
        evaluations,
    })
}

/// Upper bound on the Cheeger constant from a metric ball `U`: the outer
/// Minkowski content of its boundary over its measure.
#[derive(Debug, Clone, Serialize)]
pub struct CheegerEstimate {
    pub center: Vec<f64>,
    pub radius: f64,
    pub eps: f64,
    pub volume: McEstimate,
    /// `mu(U_eps \ U) / eps`.
    pub boundary_eps: McEstimate,
    pub boundary_half_eps: McEstimate,
    /// `2 nu(eps/2) - nu(eps)`.
    pub boundary_extrapolated: f64,
    pub boundary_stderr: f64,
    pub quotient: f64,
    pub stderr: f64,
}

pub fn cheeger_quotient(
    body: &ConvexBody,
    center: &Point,
    radius: f64,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<CheegerEstimate> {
    if !(eps > 0.0 && radius > 0.0) {
        return Err(GeometryError::InvalidArgument(
            "radius and eps must be positive".into(),
        ));
    }
    let volume = annulus_measure(body, center, 0.0, radius, samples, seed)?;
    let shell = |e: f64, s: u64| -> Result<McEstimate> {
        let m = annulus_measure(body, center, radius, radius + e, samples, s)?;
        Ok(McEstimate {
            value: m.value / e,
            stderr: m.stderr / e,
            ..m
        })
    };
    let full = shell(eps, seed.wrapping_add(1))?;
    let half = shell(eps / 2.0, seed.wrapping_add(2))?;
    let ext = 2.0 * half.value - full.value;
    let ext_err = (4.0 * half.stderr.powi(2) + full.stderr.powi(2)).sqrt();
    if full.stderr > 0.25 * full.value.abs() {
        return Err(GeometryError::Sampling(
            "eps too small for the sample budget".into(),
        ));
    }
    let q = ext / volume.value;
    let stderr = q * ((ext_err / ext).powi(2) + (volume.stderr / volume.value).powi(2)).sqrt();
    Ok(CheegerEstimate {
        center: center.iter().cloned().collect(),
        radius,
        eps,
        volume,
        boundary_eps: full,
        boundary_half_eps: half,
        boundary_extrapolated: ext,
        boundary_stderr: ext_err,
        quotient: q,
        stderr,
    })
}

/// The solid cylinder `D x (-1, 1)` over the unit disk.
pub fn cylinder() -> ConvexBody {
    ConvexBody::product(vec![
        ConvexBody::unit_ball(2),
        ConvexBody::interval(-1.0, 1.0).expect("valid interval"),
    ])
    .expect("valid product")
}

/// `(1 + t)(1 - t)`.
pub fn alpha(t: f64) -> f64 {
    (1.0 + t) * (1.0 - t)
}

/// Sandwich constants for the cylinder's tangent balls.
pub const CYLINDER_C1: f64 = 2.0 / 3.0;
pub const CYLINDER_C2: f64 = 8.0;

/// `C1 / (4 C2)`: the lower bound on the bottom of the cylinder's spectrum.
pub fn cylinder_spectral_bound() -> f64 {
    CYLINDER_C1 / (4.0 * CYLINDER_C2)
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderRow {
    pub q: [f64; 2],
    pub t: f64,
    pub alpha: f64,
    pub tub_volume: f64,
    pub tub_stderr: f64,
    pub section_volume: f64,
    /// `vol TB_C(p) / (alpha(t) vol TB_D(q))`.
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// `vol TB_C(p) / vol TB_D(q)`.
    pub ratio_without_alpha: f64,
    pub within: bool,
    pub within_without_alpha: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fact1 {
    pub q: [f64; 2],
    pub t: f64,
    pub vertical_radius: f64,
    pub alpha: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderReport {
    pub c1: f64,
    pub c2: f64,
    pub rows: Vec<CylinderRow>,
    pub fact1: Vec<Fact1>,
    pub fact1_max_defect: f64,
    /// Every row satisfies the sandwich with the `alpha(t)` factor.
    pub sandwich_holds: bool,
    /// Every row satisfies the lower bound written without `alpha(t)`.
    pub variant_without_alpha_holds: bool,
    pub spectral_bound: f64,
    pub pass: bool,
}

/// Tangent-ball sandwich on the cylinder at the points `(q, t)`.
pub fn cylinder_sandwich(
    points: &[([f64; 2], f64)],
    samples: usize,
    seed: u64,
) -> Result<CylinderReport> {
    let cyl = cylinder();
    let disk = ConvexBody::unit_ball(2);
    let tol = 1e-9;
    let rows: Vec<Result<(CylinderRow, Fact1)>> = points
        .par_iter()
        .enumerate()
        .map(|(k, &(q, t))| {
            if !(t > -1.0 && t < 1.0) {
                return Err(GeometryError::InvalidArgument(format!(
                    "t = {t} outside (-1, 1)"
                )));
            }
            let p = DVector::from_vec(vec![q[0], q[1], t]);
            let tub = tub_volume_with(
                &cyl,
                &p,
                VolumeMethod::MonteCarlo {
                    samples,
                    seed: seed.wrapping_add(k as u64),
                },
            )?;
            let sec = tub_volume_with(
                &disk,
                &DVector::from_vec(q.to_vec()),
                VolumeMethod::Polygon { resolution: 1024 },
            )?;
            let a = alpha(t);
            let ratio = tub.value / (a * sec.value);
            let ratio_stderr = tub.stderr / (a * sec.value);
            let plain = tub.value / sec.value;
            let slack = 3.0 * ratio_stderr + tol;
            let row = CylinderRow {
                q,
                t,
                alpha: a,
                tub_volume: tub.value,
                tub_stderr: tub.stderr,
                section_volume: sec.value,
                ratio,
                ratio_stderr,
                ratio_without_alpha: plain,
                within: ratio >= CYLINDER_C1 - slack && ratio <= CYLINDER_C2 + slack,
                within_without_alpha: plain >= CYLINDER_C1 - 3.0 * tub.stderr / sec.value - tol,
            };
            Ok((row, fact1_check(q, t)?))
        })
        .collect();
    let (rows, fact1): (Vec<_>, Vec<_>) = rows
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let fact1_max_defect = fact1.iter().map(|f| f.defect).fold(0.0, f64::max);
    let sandwich_holds = rows.iter().all(|r| r.within);
    Ok(CylinderReport {
        c1: CYLINDER_C1,
        c2: CYLINDER_C2,
        variant_without_alpha_holds: rows.iter().all(|r| r.within_without_alpha),
        pass: sandwich_holds && fact1_max_defect < 1e-9,
        rows,
        fact1,
        fact1_max_defect,
        sandwich_holds,
        spectral_bound: cylinder_spectral_bound(),
    })
}

/// Vertical radius of the cylinder's tangent ball at `(q, t)` against
/// `alpha(t)`.
pub fn fact1_check(q: [f64; 2], t: f64) -> Result<Fact1> {
    let p = DVector::from_vec(vec![q[0], q[1], t]);
    let up = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    let norm = finsler_norm(&cylinder(), &p, &up)?;
    let a = alpha(t);
    Ok(Fact1 {
        q,
        t,
        vertical_radius: 1.0 / norm,
        alpha: a,
        defect: (norm * a - 1.0).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Fact2Row {
    pub theta: f64,
    pub cap_z: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fact2 {
    pub l1: f64,
    pub l2: f64,
    /// `2 l1 l2 / (l1 + l2)`.
    pub cap_height: f64,
    pub rows: Vec<Fact2Row>,
    pub max_defect: f64,
}

/// Height of the tangent-ball boundary at the origin of the slab
/// `wide disk x (-l2, l1)` in directions at angle `theta` from vertical.
pub fn fact2_check(l1: f64, l2: f64, angles: &[f64]) -> Result<Fact2> {
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(GeometryError::InvalidArgument(
            "slab heights must be positive".into(),
        ));
    }
    let width = 10.0 * l1.max(l2);
    let slab = ConvexBody::product(vec![
        ConvexBody::ball(DVector::zeros(2), width)?,
        ConvexBody::interval(-l2, l1)?,
    ])?;
    let p = DVector::zeros(3);
    let cap_height = 2.0 * l1 * l2 / (l1 + l2);
    let mut rows = Vec::with_capacity(angles.len());
    for &theta in angles {
        let v = DVector::from_vec(vec![theta.sin(), 0.0, theta.cos()]);
        let d = slab.chord_detail(&p, &v)?;
        let flat = d.normal_plus[2] > 1.0 - 1e-12 && d.normal_minus[2] < -1.0 + 1e-12;
        if !flat {
            return Err(GeometryError::InvalidArgument(format!(
                "angle {theta} leaves the flat part of the slab"
            )));
        }
        let z = v[2] / finsler_norm(&slab, &p, &v)?;
        rows.push(Fact2Row {
            theta,
            cap_z: z,
            defect: (z - cap_height).abs(),
        });
    }
    let max_defect = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    Ok(Fact2 {
        l1,
        l2,
        cap_height,
        rows,
        max_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivatives() {
        for p in [
            Profile::Tent { r: 3.0 },
            Profile::Exponential { s: 0.4, r: 5.0 },
        ] {
            for rho in [0.3, 1.1, 2.5] {
                let h = 1e-6;
                let fd = (p.value(rho + h) - p.value(rho - h)) / (2.0 * h);
                assert!((fd - p.derivative(rho)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn vertical_radius_is_alpha() {
        let f = fact1_check([0.9, 0.0], 0.5).unwrap();
        assert!((f.vertical_radius - 0.75).abs() < 1e-9);
    }

    #[test]
    fn slab_cap() {
        let f = fact2_check(1.0, 3.0, &[0.0, 0.1, 0.2]).unwrap();
        assert!((f.cap_height - 1.5).abs() < 1e-15);
        assert!(f.max_defect < 1e-9);
        assert!(fact2_check(1.0, 1.0, &[1.5]).is_err());
    }
}
