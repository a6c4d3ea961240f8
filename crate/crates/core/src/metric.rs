//! The Hilbert distance, its Finsler norm and the dual norm on covectors.

use nalgebra::{DMatrix, DVector};

use crate::body::{Chord, ConvexBody};
use crate::directions::{self, sphere, tangent_basis};
use crate::error::{GeometryError, Result};
use crate::numeric::{golden_max, sym_apply, sym_extremes};
use crate::{Point, Vector};

/// Relative chord position below which a distance is refused when the chord
/// was found by bisection.
pub const BISECTION_REFUSAL: f64 = 1e-10;
/// Relative chord position below which a distance is refused for closed-form
/// chords: a few units in the last place.
pub const EXACT_REFUSAL: f64 = 8.0 * f64::EPSILON;
/// Relative defect above which points are declared non-collinear.
pub const COLLINEAR_TOLERANCE: f64 = 1e-9;

fn refusal_threshold(chord: &Chord) -> f64 {
    if chord.certified {
        EXACT_REFUSAL
    } else {
        BISECTION_REFUSAL
    }
}

/// A linear form on tangent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector(pub Vector);

impl Covector {
    pub fn apply(&self, v: &Vector) -> f64 {
        self.0.dot(v)
    }

    pub fn components(&self) -> &Vector {
        &self.0
    }

    pub fn scale(&self, s: f64) -> Covector {
        Covector(&self.0 * s)
    }
}

/// Cross ratio `[a, p, q, b] = (|q - a| |p - b|) / (|p - a| |q - b|)` of
/// four collinear points.
pub fn cross_ratio(a: &Point, p: &Point, q: &Point, b: &Point) -> Result<f64> {
    let n = a.len();
    for x in [p, q, b] {
        if x.len() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
    }
    let line = b - a;
    let len = line.norm();
    if len == 0.0 {
        return Err(GeometryError::Coincident);
    }
    let dir = &line / len;
    for x in [p, q] {
        let d = x - a;
        let off = (&d - &dir * d.dot(&dir)).norm() / len;
        if off > COLLINEAR_TOLERANCE {
            return Err(GeometryError::NotCollinear(off));
        }
    }
    let pa = (p - a).norm();
    let qb = (q - b).norm();
    if pa == 0.0 || qb == 0.0 {
        return Err(GeometryError::Coincident);
    }
    Ok((q - a).norm() * (p - b).norm() / (pa * qb))
}

/// Hilbert distance between two interior points.
///
/// Refuses with [`GeometryError::NearBoundary`] when either point sits so
/// close to the boundary that the chord parameters carry no significant
/// digits.
pub fn hilbert_distance(body: &ConvexBody, p: &Point, q: &Point) -> Result<f64> {
    body.check_dim(p)?;
    body.check_dim(q)?;
    if p == q {
        return if body.contains_unchecked(p) {
            Ok(0.0)
        } else {
            Err(GeometryError::NotInterior)
        };
    }
    let v = q - p;
    let c = body.chord(p, &v)?;
    let (tm, tp) = (c.t_minus, c.t_plus);
    if tp <= 1.0 {
        return Err(GeometryError::NotInterior);
    }
    let len = tp - tm;
    let thr = refusal_threshold(&c);
    let gap_p = -tm / len;
    let gap_q = (tp - 1.0) / len;
    if gap_p <= thr || gap_q <= thr {
        return Err(GeometryError::NearBoundary {
            gap: gap_p.min(gap_q),
        });
    }
    Ok(0.5 * ((1.0 / -tm).ln_1p() + (1.0 / (tp - 1.0)).ln_1p()))
}

/// Finsler norm `||u||_p = (1/2) (1/t_+ + 1/|t_-|)` of a tangent vector.
pub fn finsler_norm(body: &ConvexBody, p: &Point, u: &Vector) -> Result<f64> {
    body.check_dim(p)?;
    body.check_dim(u)?;
    if u.iter().all(|&c| c == 0.0) {
        return if body.contains_unchecked(p) {
            Ok(0.0)
        } else {
            Err(GeometryError::NotInterior)
        };
    }
    let c = body.chord(p, u)?;
    Ok(0.5 * (1.0 / c.t_plus - 1.0 / c.t_minus))
}

/// Defect `|d(p,q) + d(q,r) - d(p,r)|` of additivity along a segment; `q`
/// must lie on `[p, r]`.
pub fn geodesic_additivity_defect(
    body: &ConvexBody,
    p: &Point,
    q: &Point,
    r: &Point,
) -> Result<f64> {
    body.check_dim(q)?;
    body.check_dim(r)?;
    let seg = r - p;
    let len2 = seg.norm_squared();
    if len2 == 0.0 {
        return Err(GeometryError::Coincident);
    }
    let s = (q - p).dot(&seg) / len2;
    let off = (q - p - &seg * s).norm() / len2.sqrt();
    if off > COLLINEAR_TOLERANCE || !(-1e-12..=1.0 + 1e-12).contains(&s) {
        return Err(GeometryError::InvalidArgument(
            "middle point is not on the segment".into(),
        ));
    }
    let dpq = hilbert_distance(body, p, q)?;
    let dqr = hilbert_distance(body, q, r)?;
    let dpr = hilbert_distance(body, p, r)?;
    Ok((dpq + dqr - dpr).abs())
}

/// Differential at `x` of the distance function `rho = d(center, .)`,
/// computed from the outward normals at the two ends of the chord through
/// `center` and `x`.
pub fn distance_gradient(body: &ConvexBody, center: &Point, x: &Point) -> Result<Covector> {
    body.check_dim(center)?;
    body.check_dim(x)?;
    let v = x - center;
    if v.iter().all(|&c| c == 0.0) {
        return Err(GeometryError::InvalidArgument(
            "the distance function is not differentiable at the center".into(),
        ));
    }
    let d = body.chord_detail(center, &v)?;
    let (tm, tp) = (d.chord.t_minus, d.chord.t_plus);
    if tp <= 1.0 {
        return Err(GeometryError::NotInterior);
    }
    let na = &d.normal_minus;
    let nb = &d.normal_plus;
    let ga = na / (na.dot(&v) * (1.0 - tm));
    let gb = nb / (nb.dot(&v) * (tp - 1.0));
    Ok(Covector((ga + gb) * 0.5))
}

/// A linear frame at a point in which the tangent unit ball is roughly
/// round. Whitened coordinates `w` correspond to tangent vectors
/// `unwhiten * w`.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub point: Point,
    pub whiten: DMatrix<f64>,
    pub unwhiten: DMatrix<f64>,
    /// `|det whiten|`; Euclidean volumes in whitened coordinates are divided
    /// by this to get volumes in the original coordinates.
    pub det: f64,
}

impl LocalFrame {
    /// Builds the frame from a quadratic fit of the squared Finsler norm
    /// followed by a few second-moment corrections.
    pub fn at(body: &ConvexBody, p: &Point) -> Result<Self> {
        body.check_dim(p)?;
        if !body.contains_unchecked(p) {
            return Err(GeometryError::NotInterior);
        }
        let n = body.dim();
        let mut probes: Vec<Vector> = Vec::new();
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            probes.push(e);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..n {
            for k in i + 1..n {
                for sign in [1.0, -1.0] {
                    let mut e = DVector::zeros(n);
                    e[i] = s;
                    e[k] = sign * s;
                    probes.push(e);
                }
            }
        }
        let unknowns = n * (n + 1) / 2;
        let mut design = DMatrix::zeros(probes.len(), unknowns);
        let mut rhs = DVector::zeros(probes.len());
        for (r, d) in probes.iter().enumerate() {
            let nrm = finsler_norm(body, p, d)?;
            rhs[r] = nrm * nrm;
            let mut col = 0;
            for i in 0..n {
                for k in i..n {
                    design[(r, col)] = if i == k {
                        d[i] * d[i]
                    } else {
                        2.0 * d[i] * d[k]
                    };
                    col += 1;
                }
            }
        }
        let normal = design.transpose() * &design;
        let coef = normal
            .lu()
            .solve(&(design.transpose() * &rhs))
            .ok_or_else(|| GeometryError::NoConvergence("local frame fit".into()))?;
        let mut g = DMatrix::zeros(n, n);
        let mut col = 0;
        for i in 0..n {
            for k in i..n {
                g[(i, k)] = coef[col];
                g[(k, i)] = coef[col];
                col += 1;
            }
        }
        if sym_extremes(&g).0 <= 0.0 {
            g = DMatrix::from_fn(n, n, |i, k| if i == k { rhs[i] } else { 0.0 });
        }
        let mut whiten = sym_apply(&g, |x| x.sqrt());
        let mut unwhiten = sym_apply(&g, |x| 1.0 / x.sqrt());
        if n >= 2 {
            let dirs = sphere(n, if n == 2 { 32 } else { 16 * n * n });
            for _ in 0..6 {
                let mut m = DMatrix::zeros(n, n);
                for w in &dirs {
                    let r = 1.0 / finsler_norm(body, p, &(&unwhiten * w))?;
                    m += w * w.transpose() * (r * r);
                }
                m *= n as f64 / dirs.len() as f64;
                let (lo, hi) = sym_extremes(&m);
                if hi <= 1.05 * lo {
                    break;
                }
                let correction = sym_apply(&m, |x| 1.0 / x.sqrt());
                whiten = &correction * whiten;
                unwhiten = &unwhiten * sym_apply(&m, |x| x.sqrt());
            }
        }
        let det = whiten.determinant().abs();
        Ok(LocalFrame {
            point: p.clone(),
            whiten,
            unwhiten,
            det,
        })
    }

    /// Radial function of the tangent unit ball in whitened coordinates:
    /// `1 / ||unwhiten w||_p` for a unit `w`.
    pub fn radial(&self, body: &ConvexBody, w: &Vector) -> Result<f64> {
        Ok(1.0 / finsler_norm(body, &self.point, &(&self.unwhiten * w))?)
    }
}

/// Dual norm `||l||* = sup_{u != 0} l(u) / ||u||_p`, by sampling `directions`
/// unit vectors followed by golden-section refinement around the best one.
pub fn dual_norm(body: &ConvexBody, p: &Point, l: &Covector, directions: usize) -> Result<f64> {
    let frame = LocalFrame::at(body, p)?;
    dual_norm_in_frame(body, &frame, l, directions)
}

/// [`dual_norm`] with a precomputed frame.
pub fn dual_norm_in_frame(
    body: &ConvexBody,
    frame: &LocalFrame,
    l: &Covector,
    directions: usize,
) -> Result<f64> {
    let n = body.dim();
    body.check_dim(&l.0)?;
    if directions < 8 {
        return Err(GeometryError::InvalidArgument(
            "dual norm needs at least 8 directions".into(),
        ));
    }
    if l.0.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let lw = frame.unwhiten.transpose() * &l.0;
    let ratio = |w: &Vector| -> Result<f64> {
        let w = w.normalize();
        Ok(lw.dot(&w) * frame.radial(body, &w)?)
    };
    if n == 1 {
        let e = DVector::from_element(1, 1.0);
        return Ok(ratio(&e)?.max(ratio(&(-e))?));
    }
    let dirs = sphere(n, directions);
    let mut best = f64::NEG_INFINITY;
    let mut best_w = dirs[0].clone();
    for w in &dirs {
        let r = ratio(w)?;
        if r > best {
            best = r;
            best_w = w.clone();
        }
    }
    let mut failure = None;
    let refined = if n == 2 {
        let theta = best_w[1].atan2(best_w[0]);
        let span = 2.0 * std::f64::consts::PI / dirs.len() as f64;
        let (_, f) = golden_max(
            |a| {
                let w = DVector::from_vec(vec![a.cos(), a.sin()]);
                ratio(&w).unwrap_or_else(|e| {
                    failure = Some(e);
                    f64::NEG_INFINITY
                })
            },
            theta - span,
            theta + span,
            1e-12,
            80,
        );
        f
    } else {
        let span = directions::covering_angle(n, dirs.len())
            .unwrap_or(0.5)
            .min(0.5);
        let mut w = best_w.clone();
        let mut fw = best;
        for _ in 0..3 {
            for t in tangent_basis(&w) {
                let base = w.clone();
                let (a, f) = golden_max(
                    |a| {
                        ratio(&(&base + &t * a.tan())).unwrap_or_else(|e| {
                            failure = Some(e);
                            f64::NEG_INFINITY
                        })
                    },
                    -span,
                    span,
                    1e-10,
                    60,
                );
                if f > fw {
                    fw = f;
                    w = (&base + &t * a.tan()).normalize();
                }
            }
        }
        fw
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(best.max(refined))
}
