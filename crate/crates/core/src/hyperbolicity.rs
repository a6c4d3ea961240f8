//! Four-point (Gromov) hyperbolicity probes. The sampled defects are lower
//! bounds for the hyperbolicity constant.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::ConvexBody;
use crate::directions::standard_normal;
use crate::error::{GeometryError, Result};
use crate::measure::radial_parameter;
use crate::metric::hilbert_distance;
use crate::Point;

/// `(x | y)_w = (d(x, w) + d(y, w) - d(x, y)) / 2`.
pub fn gromov_product(body: &ConvexBody, x: &Point, y: &Point, w: &Point) -> Result<f64> {
    let d = |a: &Point, b: &Point| -> Result<f64> {
        if a == b {
            Ok(0.0)
        } else {
            hilbert_distance(body, a, b)
        }
    };
    Ok(0.5 * (d(x, w)? + d(y, w)? - d(x, y)?))
}

/// Largest four-point defect of a quadruple over all labelings: half the
/// gap between the two largest of the three pairings' distance sums.
pub fn four_point_defect(body: &ConvexBody, q: &[Point; 4]) -> Result<f64> {
    let d = |i: usize, j: usize| -> Result<f64> {
        if q[i] == q[j] {
            Ok(0.0)
        } else {
            hilbert_distance(body, &q[i], &q[j])
        }
    };
    let mut s = [
        d(0, 1)? + d(2, 3)?,
        d(0, 2)? + d(1, 3)?,
        d(0, 3)? + d(1, 2)?,
    ];
    s.sort_by(f64::total_cmp);
    Ok(0.5 * (s[2] - s[1]))
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaEstimate {
    pub scale: f64,
    pub quadruples: usize,
    /// Largest sampled defect: lower-bound evidence for delta.
    pub max_defect: f64,
    pub witness: [Vec<f64>; 4],
    pub seed: u64,
}

/// A point of the metric ball `B(center, r)`: uniform distance in `[0, r]`
/// along a uniformly random direction.
fn sample_ball<R: Rng>(body: &ConvexBody, center: &Point, r: f64, rng: &mut R) -> Result<Point> {
    let n = body.dim();
    let u = loop {
        let g = DVector::from_fn(n, |_, _| standard_normal(rng));
        let norm = g.norm();
        if norm > 1e-9 {
            break g / norm;
        }
    };
    let rho = r * rng.gen::<f64>();
    let c = body.chord(center, &u)?;
    Ok(center + &u * radial_parameter(c.t_minus, c.t_plus, rho).0)
}

/// Samples `quadruples` quadruples in each ball `B(center, R)` and reports
/// the largest defect per scale.
pub fn delta_probe(
    body: &ConvexBody,
    center: &Point,
    scales: &[f64],
    quadruples: usize,
    seed: u64,
) -> Result<Vec<DeltaEstimate>> {
    body.check_dim(center)?;
    if quadruples == 0 {
        return Err(GeometryError::InvalidArgument(
            "no quadruples requested".into(),
        ));
    }
    scales
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            if !(r > 0.0 && r.is_finite()) {
                return Err(GeometryError::InvalidArgument(format!("invalid scale {r}")));
            }
            let results: Vec<Result<(f64, [Point; 4])>> = (0..quadruples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((k as u64) << 40) | i as u64);
                    let q = [
                        sample_ball(body, center, r, &mut rng)?,
                        sample_ball(body, center, r, &mut rng)?,
                        sample_ball(body, center, r, &mut rng)?,
                        sample_ball(body, center, r, &mut rng)?,
                    ];
                    Ok((four_point_defect(body, &q)?, q))
                })
                .collect();
            let mut best: Option<(f64, [Point; 4])> = None;
            for res in results {
                let (d, q) = res?;
                if best.as_ref().is_none_or(|b| d > b.0) {
                    best = Some((d, q));
                }
            }
            let (max_defect, q) = best.expect("at least one quadruple");
            Ok(DeltaEstimate {
                scale: r,
                quadruples,
                max_defect,
                witness: q.map(|p| p.iter().cloned().collect()),
                seed,
            })
        })
        .collect()
}
