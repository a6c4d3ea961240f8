//! Bounded open convex domains and their chord oracles.
//!
//! A [`ConvexBody`] is an open, bounded, full-dimensional convex set given by
//! a closed-form description. Every kind answers three queries exactly or to
//! machine precision: membership, the chord through a point along a
//! direction (with outward normals at both exits), and the support function.

mod polytope;
mod spec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GeometryError, Result};
use crate::{Point, Vector};

pub(crate) use polytope::chebyshev_center;
pub use spec::BodySpec;

/// The parameters of the two boundary crossings of the line `x + t v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    /// Negative parameter of the backward exit.
    pub t_minus: f64,
    /// Positive parameter of the forward exit.
    pub t_plus: f64,
    /// False when the exits were located by bisection rather than in closed
    /// form.
    pub certified: bool,
}

impl Chord {
    /// Relative position of the base point inside the chord, in `(0, 1)`:
    /// the smaller of the two exit parameters over the chord length.
    pub fn relative_gap(&self) -> f64 {
        (-self.t_minus).min(self.t_plus) / (self.t_plus - self.t_minus)
    }
}

/// A chord together with outward (not necessarily unit) normals of the
/// boundary at both exits.
#[derive(Debug, Clone)]
pub struct ChordDetail {
    pub chord: Chord,
    pub normal_minus: Vector,
    pub normal_plus: Vector,
}

/// The closed-form description of a body.
#[derive(Debug, Clone)]
pub enum BodyKind {
    /// Open Euclidean ball.
    Ball { center: Point, radius: f64 },
    /// `{x : (x - c)^T M (x - c) < 1}` with `M` symmetric positive definite.
    Ellipsoid {
        center: Point,
        shape: DMatrix<f64>,
        /// Upper Cholesky factor `U` with `M = U^T U`.
        factor: DMatrix<f64>,
        shape_inv: DMatrix<f64>,
    },
    /// `{x : A x < b}` with unit rows.
    HPolytope {
        normals: DMatrix<f64>,
        offsets: DVector<f64>,
        vertices: Option<Vec<Point>>,
        bbox: (Point, Point),
    },
    /// Cartesian product; coordinates are concatenated in factor order.
    Product { factors: Vec<ConvexBody> },
    /// Open `radius`-neighbourhood of a body.
    MinkowskiBall { base: Box<ConvexBody>, radius: f64 },
    /// `{map x + shift : x in base}`.
    Affine {
        map: DMatrix<f64>,
        inverse: DMatrix<f64>,
        shift: Vector,
        base: Box<ConvexBody>,
    },
}

/// A bounded open convex domain.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    interior: Point,
    kind: BodyKind,
}

const MAX_BISECTION: usize = 200;

fn check_finite(field: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(GeometryError::invalid_body(field, "entries must be finite"))
    }
}

/// Roots of `|d + t v|^2 = r^2` for `|d| < r`, computed stably.
fn sphere_chord(d: &Vector, v: &Vector, radius: f64) -> (f64, f64) {
    let a = v.norm_squared();
    let b = d.dot(v);
    let dn = d.norm();
    let c = (dn - radius) * (dn + radius);
    let disc = (b * b - a * c).max(0.0).sqrt();
    if b >= 0.0 {
        let q = -(b + disc);
        (q / a, c / q)
    } else {
        let q = disc - b;
        (c / q, q / a)
    }
}

impl ConvexBody {
    // ---- constructors -------------------------------------------------

    /// Open ball of the given center and radius.
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        check_finite("center", center.iter().cloned())?;
        if center.is_empty() {
            return Err(GeometryError::invalid_body(
                "dim",
                "dimension must be at least 1",
            ));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::invalid_body(
                "radius",
                "must be positive and finite",
            ));
        }
        Ok(ConvexBody {
            dim: center.len(),
            interior: center.clone(),
            kind: BodyKind::Ball { center, radius },
        })
    }

    /// Open unit ball centred at the origin.
    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(DVector::zeros(dim.max(1)), 1.0).expect("unit ball is valid")
    }

    /// `{x : (x - c)^T M (x - c) < 1}`.
    pub fn ellipsoid(center: Point, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        check_finite("center", center.iter().cloned())?;
        check_finite("shape", shape.iter().cloned())?;
        if n == 0 {
            return Err(GeometryError::invalid_body(
                "center",
                "dimension must be at least 1",
            ));
        }
        if shape.shape() != (n, n) {
            return Err(GeometryError::invalid_body(
                "shape",
                format!(
                    "expected a {n}x{n} matrix, got {}x{}",
                    shape.nrows(),
                    shape.ncols()
                ),
            ));
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-10 * shape.amax().max(1.0) {
            return Err(GeometryError::invalid_body(
                "shape",
                "matrix is not symmetric",
            ));
        }
        let shape = (&shape + shape.transpose()) * 0.5;
        let chol = shape.clone().cholesky().ok_or_else(|| {
            GeometryError::invalid_body("shape", "matrix is not positive definite")
        })?;
        let factor = chol.l().transpose();
        let shape_inv = chol.inverse();
        Ok(ConvexBody {
            dim: n,
            interior: center.clone(),
            kind: BodyKind::Ellipsoid {
                center,
                shape,
                factor,
                shape_inv,
            },
        })
    }

    /// `{x : A x < b}`. Rows are normalized; the set must be bounded and
    /// have nonempty interior.
    pub fn hpolytope(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        check_finite("A", a.iter().cloned())?;
        check_finite("b", b.iter().cloned())?;
        if n == 0 {
            return Err(GeometryError::invalid_body(
                "A",
                "dimension must be at least 1",
            ));
        }
        if b.len() != m {
            return Err(GeometryError::invalid_body(
                "b",
                format!("expected {m} offsets, got {}", b.len()),
            ));
        }
        if m < n + 1 {
            return Err(GeometryError::invalid_body(
                "A",
                format!(
                    "a bounded polytope in dimension {n} needs at least {} rows",
                    n + 1
                ),
            ));
        }
        let mut normals = a;
        let mut offsets = b;
        for i in 0..m {
            let len = normals.row(i).norm();
            if len <= 1e-300 {
                return Err(GeometryError::invalid_body(format!("A[{i}]"), "zero row"));
            }
            normals.row_mut(i).scale_mut(1.0 / len);
            offsets[i] /= len;
        }
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for k in 0..n {
            let mut e = DVector::zeros(n);
            e[k] = 1.0;
            hi[k] = polytope::lp_maximize(&e, &normals, &offsets)?;
            lo[k] = -polytope::lp_maximize(&(-e), &normals, &offsets)?;
        }
        let (center, radius) = polytope::chebyshev_center(&normals, &offsets)?;
        let scale = (&hi - &lo).amax().max(f64::MIN_POSITIVE);
        if radius <= 1e-12 * scale {
            return Err(GeometryError::Infeasible(
                "polytope has empty interior".into(),
            ));
        }
        let vertices = if n <= 3 && m <= 64 {
            Some(polytope::enumerate_vertices(&normals, &offsets))
        } else {
            None
        };
        Ok(ConvexBody {
            dim: n,
            interior: center,
            kind: BodyKind::HPolytope {
                normals,
                offsets,
                vertices,
                bbox: (lo, hi),
            },
        })
    }

    /// Interior of the convex hull of the given points (dimension at most 3).
    pub fn vpolytope(vertices: &[Point]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(GeometryError::invalid_body("vertices", "no vertices given"));
        }
        let n = vertices[0].len();
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != n {
                return Err(GeometryError::invalid_body(
                    format!("vertices[{i}]"),
                    format!("expected {n} coordinates, got {}", v.len()),
                ));
            }
            check_finite(&format!("vertices[{i}]"), v.iter().cloned())?;
        }
        if n == 0 || n > 3 {
            return Err(GeometryError::invalid_body(
                "vertices",
                "vertex representation is supported in dimensions 1 to 3",
            ));
        }
        if vertices.len() < n + 1 {
            return Err(GeometryError::invalid_body(
                "vertices",
                "too few vertices for a full-dimensional hull",
            ));
        }
        let facets = polytope::hull_facets(vertices)?;
        if facets.len() < n + 1 {
            return Err(GeometryError::invalid_body(
                "vertices",
                "hull is not full-dimensional",
            ));
        }
        let a = DMatrix::from_fn(facets.len(), n, |i, k| facets[i].0[k]);
        let b = DVector::from_fn(facets.len(), |i, _| facets[i].1);
        Self::hpolytope(a, b).map_err(|e| match e {
            GeometryError::Infeasible(_) => {
                GeometryError::invalid_body("vertices", "hull is not full-dimensional")
            }
            other => other,
        })
    }

    /// The open box `prod (lo_k, hi_k)`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let n = lo.len();
        if hi.len() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                got: hi.len(),
            });
        }
        let mut a = DMatrix::zeros(2 * n, n);
        let mut b = DVector::zeros(2 * n);
        for k in 0..n {
            if hi[k] <= lo[k] {
                return Err(GeometryError::invalid_body("bounds", "empty interval"));
            }
            a[(2 * k, k)] = 1.0;
            b[2 * k] = hi[k];
            a[(2 * k + 1, k)] = -1.0;
            b[2 * k + 1] = -lo[k];
        }
        Self::hpolytope(a, b)
    }

    /// The open interval `(lo, hi)` as a one-dimensional body.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::cuboid(&[lo], &[hi])
    }

    /// Cartesian product of bodies.
    pub fn product(factors: Vec<ConvexBody>) -> Result<Self> {
        if factors.is_empty() {
            return Err(GeometryError::invalid_body(
                "factors",
                "at least one factor is required",
            ));
        }
        let dim = factors.iter().map(|f| f.dim).sum();
        let mut interior = DVector::zeros(dim);
        let mut off = 0;
        for f in &factors {
            interior.rows_mut(off, f.dim).copy_from(&f.interior);
            off += f.dim;
        }
        Ok(ConvexBody {
            dim,
            interior,
            kind: BodyKind::Product { factors },
        })
    }

    /// Open `radius`-neighbourhood of `base`. The base must admit Euclidean
    /// projection, which excludes affine images of products and
    /// neighbourhoods.
    pub fn minkowski_ball(base: ConvexBody, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::invalid_body(
                "radius",
                "must be positive and finite",
            ));
        }
        if !base.supports_projection() {
            return Err(GeometryError::invalid_body(
                "base",
                "neighbourhoods of affine images of products are not supported",
            ));
        }
        Ok(ConvexBody {
            dim: base.dim,
            interior: base.interior.clone(),
            kind: BodyKind::MinkowskiBall {
                base: Box::new(base),
                radius,
            },
        })
    }

    /// `{map x + shift : x in self}` for an invertible `map`.
    pub fn affine_image(&self, map: &DMatrix<f64>, shift: &Vector) -> Result<Self> {
        let n = self.dim;
        check_finite("map", map.iter().cloned())?;
        check_finite("shift", shift.iter().cloned())?;
        if map.shape() != (n, n) {
            return Err(GeometryError::invalid_body(
                "map",
                format!(
                    "expected a {n}x{n} matrix, got {}x{}",
                    map.nrows(),
                    map.ncols()
                ),
            ));
        }
        if shift.len() != n {
            return Err(GeometryError::invalid_body(
                "shift",
                format!("expected {n} coordinates, got {}", shift.len()),
            ));
        }
        let det = map.determinant();
        let scale = map.amax().max(f64::MIN_POSITIVE).powi(n as i32);
        if det.abs() <= 1e-12 * scale {
            return Err(GeometryError::SingularMap(det.abs()));
        }
        let inverse = map
            .clone()
            .try_inverse()
            .ok_or(GeometryError::SingularMap(det.abs()))?;
        match &self.kind {
            BodyKind::Ball { center, radius } => {
                let shape = inverse.transpose() * &inverse / (radius * radius);
                Self::ellipsoid(map * center + shift, shape)
            }
            BodyKind::Ellipsoid { center, shape, .. } => {
                let s = inverse.transpose() * shape * &inverse;
                Self::ellipsoid(map * center + shift, (&s + s.transpose()) * 0.5)
            }
            BodyKind::HPolytope {
                normals, offsets, ..
            } => {
                let a = normals * &inverse;
                let b = offsets + &a * shift;
                Self::hpolytope(a, b)
            }
            BodyKind::Affine {
                map: m1,
                shift: s1,
                base,
                ..
            } => base.affine_image(&(map * m1), &(map * s1 + shift)),
            _ => Ok(ConvexBody {
                dim: n,
                interior: map * &self.interior + shift,
                kind: BodyKind::Affine {
                    map: map.clone(),
                    inverse,
                    shift: shift.clone(),
                    base: Box::new(self.clone()),
                },
            }),
        }
    }

    /// Homothety of ratio `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let map = DMatrix::identity(self.dim, self.dim) * factor;
        self.affine_image(&map, &DVector::zeros(self.dim))
    }

    // ---- accessors ----------------------------------------------------

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    /// A point well inside the body (center, Chebyshev center, ...).
    pub fn interior_point(&self) -> &Point {
        &self.interior
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            BodyKind::Ball { .. } => "ball",
            BodyKind::Ellipsoid { .. } => "ellipsoid",
            BodyKind::HPolytope { .. } => "hpolytope",
            BodyKind::Product { .. } => "product",
            BodyKind::MinkowskiBall { .. } => "minkowski_ball",
            BodyKind::Affine { .. } => "affine",
        }
    }

    /// Whether chords are computed in closed form.
    pub fn has_exact_chords(&self) -> bool {
        match &self.kind {
            BodyKind::MinkowskiBall { .. } => false,
            BodyKind::Product { factors } => factors.iter().all(|f| f.has_exact_chords()),
            BodyKind::Affine { base, .. } => base.has_exact_chords(),
            _ => true,
        }
    }

    fn supports_projection(&self) -> bool {
        match &self.kind {
            BodyKind::Affine { .. } => false,
            BodyKind::Product { factors } => factors.iter().all(|f| f.supports_projection()),
            BodyKind::MinkowskiBall { base, .. } => base.supports_projection(),
            _ => true,
        }
    }

    pub(crate) fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            })
        }
    }

    // ---- membership ---------------------------------------------------

    /// Whether `x` lies in the open body.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &Point) -> bool {
        match &self.kind {
            BodyKind::Ball { center, radius } => (x - center).norm() < *radius,
            BodyKind::Ellipsoid { center, factor, .. } => (factor * (x - center)).norm() < 1.0,
            BodyKind::HPolytope {
                normals, offsets, ..
            } => (0..normals.nrows()).all(|i| normals.row(i).transpose().dot(x) < offsets[i]),
            BodyKind::Product { factors } => {
                let mut off = 0;
                factors.iter().all(|f| {
                    let inside = f.contains_unchecked(&x.rows(off, f.dim).into_owned());
                    off += f.dim;
                    inside
                })
            }
            BodyKind::MinkowskiBall { base, radius } => match base.distance_to(x) {
                Ok(d) => d < *radius,
                Err(_) => false,
            },
            BodyKind::Affine {
                inverse,
                shift,
                base,
                ..
            } => base.contains_unchecked(&(inverse * (x - shift))),
        }
    }

    // ---- chords -------------------------------------------------------

    /// The chord through the interior point `x` along the nonzero direction
    /// `v`, as parameters of the line `x + t v`.
    pub fn chord(&self, x: &Point, v: &Vector) -> Result<Chord> {
        self.checked_chord(x, v, false).map(|(c, _)| c)
    }

    /// The chord together with outward normals at its two exits.
    pub fn chord_detail(&self, x: &Point, v: &Vector) -> Result<ChordDetail> {
        let (chord, normals) = self.checked_chord(x, v, true)?;
        let (normal_minus, normal_plus) = normals.expect("normals requested");
        Ok(ChordDetail {
            chord,
            normal_minus,
            normal_plus,
        })
    }

    fn checked_chord(
        &self,
        x: &Point,
        v: &Vector,
        normals: bool,
    ) -> Result<(Chord, Option<(Vector, Vector)>)> {
        self.check_dim(x)?;
        self.check_dim(v)?;
        if v.iter().all(|&c| c == 0.0) {
            return Err(GeometryError::ZeroDirection);
        }
        if !x.iter().all(|c| c.is_finite()) || !v.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidArgument(
                "non-finite coordinates".into(),
            ));
        }
        let (tm, tp, certified, nrm) = self.raw_chord(x, v, normals)?;
        if !(tm < 0.0 && tp > 0.0) {
            return Err(GeometryError::NotInterior);
        }
        Ok((
            Chord {
                t_minus: tm,
                t_plus: tp,
                certified,
            },
            nrm,
        ))
    }

    #[allow(clippy::type_complexity)]
    fn raw_chord(
        &self,
        x: &Point,
        v: &Vector,
        want_normals: bool,
    ) -> Result<(f64, f64, bool, Option<(Vector, Vector)>)> {
        match &self.kind {
            BodyKind::Ball { center, radius } => {
                let d = x - center;
                if d.norm() >= *radius {
                    return Err(GeometryError::NotInterior);
                }
                let (tm, tp) = sphere_chord(&d, v, *radius);
                let normals = want_normals.then(|| (&d + v * tm, &d + v * tp));
                Ok((tm, tp, true, normals))
            }
            BodyKind::Ellipsoid {
                center,
                shape,
                factor,
                ..
            } => {
                let d = factor * (x - center);
                if d.norm() >= 1.0 {
                    return Err(GeometryError::NotInterior);
                }
                let w = factor * v;
                let (tm, tp) = sphere_chord(&d, &w, 1.0);
                let normals = want_normals.then(|| {
                    let base = x - center;
                    (shape * (&base + v * tm), shape * (&base + v * tp))
                });
                Ok((tm, tp, true, normals))
            }
            BodyKind::HPolytope {
                normals, offsets, ..
            } => {
                let mut tp = f64::INFINITY;
                let mut tm = f64::NEG_INFINITY;
                let (mut ip, mut im) = (usize::MAX, usize::MAX);
                for i in 0..normals.nrows() {
                    let row = normals.row(i);
                    let slack = offsets[i] - row.transpose().dot(x);
                    if slack <= 0.0 {
                        return Err(GeometryError::NotInterior);
                    }
                    let rate = row.transpose().dot(v);
                    if rate > 0.0 {
                        let t = slack / rate;
                        if t < tp {
                            tp = t;
                            ip = i;
                        }
                    } else if rate < 0.0 {
                        let t = slack / rate;
                        if t > tm {
                            tm = t;
                            im = i;
                        }
                    }
                }
                if ip == usize::MAX || im == usize::MAX {
                    return Err(GeometryError::Unbounded);
                }
                let nrm = want_normals
                    .then(|| (normals.row(im).transpose(), normals.row(ip).transpose()));
                Ok((tm, tp, true, nrm))
            }
            BodyKind::Product { factors } => {
                let mut tp = f64::INFINITY;
                let mut tm = f64::NEG_INFINITY;
                let mut certified = true;
                let mut nplus = None;
                let mut nminus = None;
                let mut off = 0;
                for f in factors {
                    let xf = x.rows(off, f.dim).into_owned();
                    let vf = v.rows(off, f.dim).into_owned();
                    if vf.iter().all(|&c| c == 0.0) {
                        if !f.contains_unchecked(&xf) {
                            return Err(GeometryError::NotInterior);
                        }
                    } else {
                        let (a, b, cert, nrm) = f.raw_chord(&xf, &vf, want_normals)?;
                        certified &= cert;
                        if b < tp {
                            tp = b;
                            nplus = nrm.as_ref().map(|n| (off, n.1.clone()));
                        }
                        if a > tm {
                            tm = a;
                            nminus = nrm.as_ref().map(|n| (off, n.0.clone()));
                        }
                    }
                    off += f.dim;
                }
                let embed = |p: Option<(usize, Vector)>| {
                    let (o, n) = p.expect("active factor");
                    let mut full = DVector::zeros(self.dim);
                    full.rows_mut(o, n.len()).copy_from(&n);
                    full
                };
                let nrm = want_normals.then(|| (embed(nminus), embed(nplus)));
                Ok((tm, tp, certified, nrm))
            }
            BodyKind::MinkowskiBall { base, radius } => {
                let r = *radius;
                let gap = |t: f64| -> Result<f64> { Ok(base.distance_to(&(x + v * t))? - r) };
                if gap(0.0)? >= 0.0 {
                    return Err(GeometryError::NotInterior);
                }
                let tp = minkowski_exit(base, r, x, v)?;
                let tm = -minkowski_exit(base, r, x, &(-v))?;
                let nrm = if want_normals {
                    let exit = |t: f64| -> Result<Vector> {
                        let y = x + v * t;
                        let z = base.project(&y)?;
                        Ok(y - z)
                    };
                    Some((exit(tm)?, exit(tp)?))
                } else {
                    None
                };
                Ok((tm, tp, false, nrm))
            }
            BodyKind::Affine {
                inverse,
                shift,
                base,
                ..
            } => {
                let xb = inverse * (x - shift);
                let vb = inverse * v;
                let (tm, tp, cert, nrm) = base.raw_chord(&xb, &vb, want_normals)?;
                let nrm = nrm.map(|(a, b)| (inverse.transpose() * a, inverse.transpose() * b));
                Ok((tm, tp, cert, nrm))
            }
        }
    }

    // ---- projection and support -----------------------------------------

    /// Closest point of the closure to `y`.
    pub fn project(&self, y: &Point) -> Result<Point> {
        self.check_dim(y)?;
        match &self.kind {
            BodyKind::Ball { center, radius } => {
                let d = y - center;
                let n = d.norm();
                if n <= *radius {
                    Ok(y.clone())
                } else {
                    Ok(center + d * (*radius / n))
                }
            }
            BodyKind::Ellipsoid {
                center,
                shape,
                factor,
                ..
            } => {
                if (factor * (y - center)).norm() <= 1.0 {
                    return Ok(y.clone());
                }
                let eig = SymmetricEigen::new(shape.clone());
                let w = eig.eigenvectors.transpose() * (y - center);
                let lam = &eig.eigenvalues;
                let level = |mu: f64| -> f64 {
                    (0..w.len())
                        .map(|i| lam[i] * (w[i] / (1.0 + mu * lam[i])).powi(2))
                        .sum()
                };
                let mut hi = 1.0 / lam.min();
                while level(hi) > 1.0 {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..MAX_BISECTION {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if level(mid) > 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let z = DVector::from_fn(w.len(), |i, _| w[i] / (1.0 + hi * lam[i]));
                Ok(center + &eig.eigenvectors * z)
            }
            BodyKind::HPolytope {
                normals, offsets, ..
            } => polytope::project_onto(normals, offsets, &self.interior, y),
            BodyKind::Product { factors } => {
                let mut out = DVector::zeros(self.dim);
                let mut off = 0;
                for f in factors {
                    let z = f.project(&y.rows(off, f.dim).into_owned())?;
                    out.rows_mut(off, f.dim).copy_from(&z);
                    off += f.dim;
                }
                Ok(out)
            }
            BodyKind::MinkowskiBall { base, radius } => {
                let z = base.project(y)?;
                let d = y - &z;
                let n = d.norm();
                if n <= *radius {
                    Ok(y.clone())
                } else {
                    Ok(z + d * (*radius / n))
                }
            }
            BodyKind::Affine { .. } => Err(GeometryError::Unsupported(
                "Euclidean projection onto a general affine image".into(),
            )),
        }
    }

    /// Euclidean distance from `y` to the closure (zero inside).
    pub fn distance_to(&self, y: &Point) -> Result<f64> {
        Ok((y - self.project(y)?).norm())
    }

    /// Support function `sup_{x in K} w . x`.
    pub fn support(&self, w: &Vector) -> Result<f64> {
        self.check_dim(w)?;
        match &self.kind {
            BodyKind::Ball { center, radius } => Ok(center.dot(w) + radius * w.norm()),
            BodyKind::Ellipsoid {
                center, shape_inv, ..
            } => Ok(center.dot(w) + w.dot(&(shape_inv * w)).max(0.0).sqrt()),
            BodyKind::HPolytope {
                normals,
                offsets,
                vertices,
                ..
            } => match vertices {
                Some(vs) if !vs.is_empty() => Ok(vs
                    .iter()
                    .map(|p| p.dot(w))
                    .fold(f64::NEG_INFINITY, f64::max)),
                _ => polytope::lp_maximize(w, normals, offsets),
            },
            BodyKind::Product { factors } => {
                let mut total = 0.0;
                let mut off = 0;
                for f in factors {
                    total += f.support(&w.rows(off, f.dim).into_owned())?;
                    off += f.dim;
                }
                Ok(total)
            }
            BodyKind::MinkowskiBall { base, radius } => Ok(base.support(w)? + radius * w.norm()),
            BodyKind::Affine {
                map, shift, base, ..
            } => Ok(base.support(&(map.transpose() * w))? + w.dot(shift)),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)` of the closure.
    pub fn bounding_box(&self) -> (Point, Point) {
        match &self.kind {
            BodyKind::HPolytope { bbox, .. } => bbox.clone(),
            BodyKind::Ball { center, radius } => {
                (center.map(|c| c - radius), center.map(|c| c + radius))
            }
            BodyKind::Ellipsoid {
                center, shape_inv, ..
            } => {
                let half = shape_inv.diagonal().map(|d| d.max(0.0).sqrt());
                (center - &half, center + &half)
            }
            _ => {
                let mut lo = DVector::zeros(self.dim);
                let mut hi = DVector::zeros(self.dim);
                for k in 0..self.dim {
                    let mut e = DVector::zeros(self.dim);
                    e[k] = 1.0;
                    hi[k] = self.support(&e).unwrap_or(f64::NAN);
                    lo[k] = -self.support(&(-e)).unwrap_or(f64::NAN);
                }
                (lo, hi)
            }
        }
    }

    /// Euclidean diameter bound: the diagonal of the bounding box.
    pub fn bounding_diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// The center of central symmetry, when the body has one.
    pub fn symmetry_center(&self) -> Option<Point> {
        match &self.kind {
            BodyKind::Ball { center, .. } | BodyKind::Ellipsoid { center, .. } => {
                Some(center.clone())
            }
            BodyKind::HPolytope {
                normals, offsets, ..
            } => {
                let (lo, hi) = self.bounding_box();
                let c = (lo + hi) * 0.5;
                let m = normals.nrows();
                let scale = offsets.amax().max(1.0);
                let symmetric = (0..m).all(|i| {
                    let ai = normals.row(i);
                    let si = offsets[i] - ai.transpose().dot(&c);
                    (0..m).any(|j| {
                        let aj = normals.row(j);
                        (ai + aj).norm() < 1e-9
                            && (offsets[j] - aj.transpose().dot(&c) - si).abs() < 1e-9 * scale
                    })
                });
                symmetric.then_some(c)
            }
            BodyKind::Product { factors } => {
                let mut c = DVector::zeros(self.dim);
                let mut off = 0;
                for f in factors {
                    c.rows_mut(off, f.dim).copy_from(&f.symmetry_center()?);
                    off += f.dim;
                }
                Some(c)
            }
            BodyKind::MinkowskiBall { base, .. } => base.symmetry_center(),
            BodyKind::Affine {
                map, shift, base, ..
            } => base.symmetry_center().map(|c| map * c + shift),
        }
    }

    /// Boundary point hit by the ray from the interior point `x` along `v`.
    pub fn boundary_point(&self, x: &Point, v: &Vector) -> Result<Point> {
        let c = self.chord(x, v)?;
        Ok(x + v * c.t_plus)
    }
}

/// Largest `t >= 0` with `gap(t) < 0`, by doubling and bisection to machine
/// precision. `gap(0) < 0` is assumed.
/// Exit parameter of `x + t v` from `base + r B`. The distance to `base`
/// is convex along the line, so Newton iterates started above the root
/// decrease monotonically onto it.
fn minkowski_exit(base: &ConvexBody, r: f64, x: &Point, v: &Vector) -> Result<f64> {
    let start = if base.contains_unchecked(x) {
        base.chord(x, v)?.t_plus
    } else {
        0.0
    };
    let dist = |t: f64| -> Result<(f64, f64)> {
        let y = x + v * t;
        let d = &y - base.project(&y)?;
        let n = d.norm();
        Ok((n, if n > 0.0 { d.dot(v) / n } else { 0.0 }))
    };
    let mut t = start + r / v.norm();
    let mut doublings = 0;
    let (mut f, mut slope) = dist(t)?;
    let floor = |t: f64| 8.0 * f64::EPSILON * (r + x.norm() + t * v.norm());
    while f < r {
        if r - f <= floor(t) {
            return Ok(t);
        }
        // a tangent step from below overshoots the root by convexity
        t = if slope > 0.0 {
            t + (r - f) / slope
        } else {
            start + 2.0 * (t - start)
        };
        (f, slope) = dist(t)?;
        doublings += 1;
        if doublings > MAX_BISECTION {
            return Err(GeometryError::BisectionFailed(MAX_BISECTION));
        }
    }
    for _ in 0..MAX_BISECTION {
        if f - r <= floor(t) {
            return Ok(t);
        }
        if slope.is_nan() || slope <= 0.0 {
            return Err(GeometryError::BisectionFailed(MAX_BISECTION));
        }
        let step = (f - r) / slope;
        if step <= 4.0 * f64::EPSILON * t {
            return Ok(t);
        }
        let (g, s) = dist(t - step)?;
        if g >= f {
            return Ok(t);
        }
        t -= step;
        (f, slope) = (g, s);
    }
    Err(GeometryError::BisectionFailed(MAX_BISECTION))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn ball_chord_is_exact() {
        let b = ConvexBody::unit_ball(2);
        let c = b.chord(&v(&[0.5, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert_eq!(c.t_plus, 0.5);
        assert_eq!(c.t_minus, -1.5);
        assert!(c.certified);
    }

    #[test]
    fn ellipsoid_chord_and_normals() {
        let shape = DMatrix::from_diagonal(&v(&[1.0, 4.0]));
        let e = ConvexBody::ellipsoid(v(&[0.0, 0.0]), shape).unwrap();
        let d = e.chord_detail(&v(&[0.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert!((d.chord.t_plus - 0.5).abs() < 1e-15);
        assert!((d.chord.t_minus + 0.5).abs() < 1e-15);
        assert!(d.normal_plus[1] > 0.0 && d.normal_minus[1] < 0.0);
    }

    #[test]
    fn polytope_chord_and_support() {
        let sq = ConvexBody::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let c = sq.chord(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert!((c.t_plus - 1.0).abs() < 1e-15 && (c.t_minus + 1.0).abs() < 1e-15);
        assert!((sq.support(&v(&[1.0, 1.0])).unwrap() - 2.0).abs() < 1e-12);
        assert!(sq.symmetry_center().is_some());
    }

    #[test]
    fn product_chord_takes_first_exit() {
        let cyl = ConvexBody::product(vec![
            ConvexBody::unit_ball(2),
            ConvexBody::interval(-1.0, 1.0).unwrap(),
        ])
        .unwrap();
        let d = cyl
            .chord_detail(&v(&[0.0, 0.0, 0.5]), &v(&[0.0, 0.0, 1.0]))
            .unwrap();
        assert!((d.chord.t_plus - 0.5).abs() < 1e-15);
        assert!((d.chord.t_minus + 1.5).abs() < 1e-15);
        assert!(d.normal_plus[2] > 0.0);
        let c = cyl
            .chord(&v(&[0.0, 0.0, 0.0]), &v(&[1.0, 0.0, 0.1]))
            .unwrap();
        assert!((c.t_plus - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minkowski_ball_chord_matches_closed_form() {
        let sq = ConvexBody::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let rounded = ConvexBody::minkowski_ball(sq, 0.5).unwrap();
        let c = rounded.chord(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((c.t_plus - 1.5).abs() < 1e-13);
        assert!(!c.certified);
        let diag = v(&[1.0, 1.0]) / 2f64.sqrt();
        let c = rounded.chord(&v(&[0.0, 0.0]), &diag).unwrap();
        assert!((c.t_plus - (2f64.sqrt() + 0.5)).abs() < 1e-13);
    }

    #[test]
    fn affine_images_are_canonicalized() {
        let map = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let e = ConvexBody::unit_ball(2)
            .affine_image(&map, &v(&[1.0, 0.0]))
            .unwrap();
        assert_eq!(e.kind_name(), "ellipsoid");
        assert!(e.contains(&v(&[2.9, 0.0])).unwrap());
        assert!(!e.contains(&v(&[3.1, 0.0])).unwrap());
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            ConvexBody::unit_ball(2).affine_image(&singular, &v(&[0.0, 0.0])),
            Err(GeometryError::SingularMap(_))
        ));
    }

    #[test]
    fn chord_errors() {
        let b = ConvexBody::unit_ball(2);
        assert_eq!(
            b.chord(&v(&[0.0, 0.0]), &v(&[0.0, 0.0])),
            Err(GeometryError::ZeroDirection)
        );
        assert_eq!(
            b.chord(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])),
            Err(GeometryError::NotInterior)
        );
        assert!(matches!(
            b.chord(&v(&[0.0, 0.0, 0.0]), &v(&[1.0, 0.0, 0.0])),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unbounded_and_empty_polytopes_are_rejected() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            ConvexBody::hpolytope(a, v(&[1.0, 1.0, 1.0])).unwrap_err(),
            GeometryError::Unbounded
        );
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        assert!(ConvexBody::hpolytope(a, v(&[1.0, -1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn vpolytope_triangle() {
        let t = ConvexBody::vpolytope(&[v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!(t.contains(&v(&[0.2, 0.2])).unwrap());
        assert!(!t.contains(&v(&[0.6, 0.6])).unwrap());
    }

    #[test]
    fn ellipsoid_projection_is_closest() {
        let shape = DMatrix::from_diagonal(&v(&[1.0, 4.0]));
        let e = ConvexBody::ellipsoid(v(&[0.0, 0.0]), shape).unwrap();
        let y = v(&[2.0, 2.0]);
        let z = e.project(&y).unwrap();
        let on = z[0] * z[0] + 4.0 * z[1] * z[1];
        assert!((on - 1.0).abs() < 1e-10);
        for k in 0..360 {
            let a = k as f64 * std::f64::consts::PI / 180.0;
            let p = v(&[a.cos(), 0.5 * a.sin()]);
            assert!((&y - &p).norm() >= (&y - &z).norm() - 1e-12);
        }
    }
}
