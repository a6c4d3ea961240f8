//! Polytope plumbing: linear programs, vertex and facet enumeration, and
//! Euclidean projection onto an H-polytope.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{GeometryError, Result};
use crate::{Point, Vector};

/// Variables are confined to a huge box so that unboundedness shows up as
/// an optimum on the box.
const BOX: f64 = 1e12;

/// Maximizes `objective . x` over `{x : A x <= b}`.
pub(crate) fn lp_maximize(objective: &Vector, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<f64> {
    let n = a.ncols();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n)
        .map(|k| problem.add_var(objective[k], (-BOX, BOX)))
        .collect();
    for i in 0..a.nrows() {
        let row: Vec<_> = (0..n).map(|k| (vars[k], a[(i, k)])).collect();
        problem.add_constraint(&row[..], ComparisonOp::Le, b[i]);
    }
    match problem.solve() {
        Ok(sol) => {
            let x = DVector::from_fn(n, |k, _| sol[vars[k]]);
            if !sol.objective().is_finite() || x.amax() >= 0.5 * BOX {
                Err(GeometryError::Unbounded)
            } else {
                Ok(sol.objective())
            }
        }
        Err(minilp::Error::Unbounded) => Err(GeometryError::Unbounded),
        Err(minilp::Error::Infeasible) => Err(GeometryError::Infeasible("empty polytope".into())),
    }
}

/// Center and radius of the largest Euclidean ball inside `{A x <= b}`,
/// assuming unit rows.
pub(crate) fn chebyshev_center(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(Point, f64)> {
    let n = a.ncols();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n).map(|_| problem.add_var(0.0, (-BOX, BOX))).collect();
    let r = problem.add_var(1.0, (0.0, f64::INFINITY));
    for i in 0..a.nrows() {
        let mut row: Vec<_> = (0..n).map(|k| (vars[k], a[(i, k)])).collect();
        row.push((r, 1.0));
        problem.add_constraint(&row[..], ComparisonOp::Le, b[i]);
    }
    match problem.solve() {
        Ok(sol) => {
            let c = DVector::from_fn(n, |k, _| sol[vars[k]]);
            if !sol[r].is_finite() || c.amax() >= 0.5 * BOX {
                return Err(GeometryError::Unbounded);
            }
            Ok((c, sol[r]))
        }
        Err(minilp::Error::Unbounded) => Err(GeometryError::Unbounded),
        Err(minilp::Error::Infeasible) => Err(GeometryError::Infeasible("empty polytope".into())),
    }
}

/// Vertices of a bounded polytope in dimension at most 3.
pub(crate) fn enumerate_vertices(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<Point> {
    let (m, n) = a.shape();
    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut out: Vec<Point> = Vec::new();
    let mut idx = vec![0usize; n];
    fn rec(
        start: usize,
        depth: usize,
        idx: &mut Vec<usize>,
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        tol: f64,
        out: &mut Vec<Point>,
    ) {
        let (m, n) = a.shape();
        if depth == n {
            let sub = DMatrix::from_fn(n, n, |r, c| a[(idx[r], c)]);
            let rhs = DVector::from_fn(n, |r, _| b[idx[r]]);
            if sub.determinant().abs() < 1e-12 {
                return;
            }
            if let Some(x) = sub.lu().solve(&rhs) {
                let feasible = (0..m).all(|i| a.row(i).transpose().dot(&x) <= b[i] + tol);
                if feasible && !out.iter().any(|v| (v - &x).norm() < tol) {
                    out.push(x);
                }
            }
            return;
        }
        for i in start..m {
            idx[depth] = i;
            rec(i + 1, depth + 1, idx, a, b, tol, out);
        }
    }
    if m >= n {
        rec(0, 0, &mut idx, a, b, tol, &mut out);
    }
    out
}

/// Facets `(unit normal, offset)` of the convex hull of points in dimension
/// 1, 2 or 3.
pub(crate) fn hull_facets(points: &[Point]) -> Result<Vec<(Vector, f64)>> {
    let n = points[0].len();
    let scale = points.iter().fold(1.0f64, |s, p| s.max(p.amax()));
    let tol = 1e-10 * scale;
    match n {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points
                .iter()
                .map(|p| p[0])
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(vec![
                (DVector::from_element(1, 1.0), hi),
                (DVector::from_element(1, -1.0), -lo),
            ])
        }
        2 => {
            let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
            pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
            pts.dedup_by(|p, q| (p.0 - q.0).abs() <= tol && (p.1 - q.1).abs() <= tol);
            let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
                (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
            };
            let mut hull: Vec<(f64, f64)> = Vec::new();
            for pass in 0..2 {
                let start = hull.len();
                let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
                    Box::new(pts.iter())
                } else {
                    Box::new(pts.iter().rev())
                };
                for &p in iter {
                    while hull.len() >= start + 2
                        && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= tol * tol
                    {
                        hull.pop();
                    }
                    hull.push(p);
                }
                hull.pop();
            }
            let mut facets = Vec::new();
            for k in 0..hull.len() {
                let p = hull[k];
                let q = hull[(k + 1) % hull.len()];
                let normal = DVector::from_vec(vec![q.1 - p.1, p.0 - q.0]);
                let len = normal.norm();
                if len <= tol {
                    continue;
                }
                let normal = normal / len;
                let offset = normal[0] * p.0 + normal[1] * p.1;
                facets.push((normal, offset));
            }
            Ok(facets)
        }
        3 => {
            let mut facets: Vec<(Vector, f64)> = Vec::new();
            let m = points.len();
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        let u = &points[j] - &points[i];
                        let v = &points[k] - &points[i];
                        let normal = u.cross(&v);
                        let len = normal.norm();
                        if len <= tol * scale {
                            continue;
                        }
                        let normal = normal / len;
                        let offset = normal.dot(&points[i]);
                        let side: Vec<f64> =
                            points.iter().map(|p| normal.dot(p) - offset).collect();
                        let candidate = if side.iter().all(|&s| s <= tol) {
                            Some((normal, offset))
                        } else if side.iter().all(|&s| s >= -tol) {
                            Some((-normal, -offset))
                        } else {
                            None
                        };
                        if let Some((nv, off)) = candidate {
                            let duplicate = facets
                                .iter()
                                .any(|(g, h)| (g - &nv).norm() < 1e-9 && (h - off).abs() < tol);
                            if !duplicate {
                                facets.push((nv, off));
                            }
                        }
                    }
                }
            }
            Ok(facets)
        }
        _ => Err(GeometryError::Unsupported(
            "vertex representation is limited to dimension 3".into(),
        )),
    }
}

/// Euclidean projection of `y` onto `{A x <= b}` by a primal active-set
/// method started from the strictly feasible point `start`.
pub(crate) fn project_onto(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    start: &Point,
    y: &Point,
) -> Result<Point> {
    let (m, n) = a.shape();
    let feasible = (0..m).all(|i| a.row(i).transpose().dot(y) <= b[i]);
    if feasible {
        return Ok(y.clone());
    }
    let scale = 1.0 + y.amax() + start.amax();
    let mut z = start.clone();
    let mut working: Vec<usize> = Vec::new();
    for _ in 0..50 * (m + n) {
        let g = y - &z;
        let (p, mult) = if working.is_empty() {
            (g.clone(), DVector::zeros(0))
        } else {
            let aw = DMatrix::from_fn(working.len(), n, |r, c| a[(working[r], c)]);
            let gram = &aw * aw.transpose();
            let rhs = &aw * &g;
            let lambda = gram
                .clone()
                .cholesky()
                .map(|ch| ch.solve(&rhs))
                .or_else(|| gram.lu().solve(&rhs))
                .ok_or_else(|| GeometryError::NoConvergence("degenerate active set".into()))?;
            (&g - aw.transpose() * &lambda, lambda)
        };
        if p.norm() <= 1e-14 * scale {
            let worst = (0..working.len()).min_by(|&i, &j| mult[i].total_cmp(&mult[j]));
            match worst {
                Some(w) if mult[w] < -1e-12 * scale => {
                    working.remove(w);
                }
                _ => return Ok(z),
            }
            continue;
        }
        let mut step = 1.0;
        let mut blocking = None;
        for i in 0..m {
            if working.contains(&i) {
                continue;
            }
            let rate = a.row(i).transpose().dot(&p);
            if rate > 0.0 {
                let slack = (b[i] - a.row(i).transpose().dot(&z)).max(0.0);
                let s = slack / rate;
                if s < step {
                    step = s;
                    blocking = Some(i);
                }
            }
        }
        z += &p * step;
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    Err(GeometryError::NoConvergence("polytope projection".into()))
}
