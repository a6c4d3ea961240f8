//! Uniform convergence of Finsler norms and Hilbert densities along
//! decreasing nested sequences of convex bodies.

use rayon::prelude::*;
use serde::Serialize;

use crate::body::ConvexBody;
use crate::directions::sphere;
use crate::error::{GeometryError, Result};
use crate::measure::{tub_volume_in_frame, VolumeMethod};
use crate::metric::{finsler_norm, LocalFrame};
use crate::{Point, Vector};

/// Points of a compact set and unit directions on which ratios are sampled.
#[derive(Debug, Clone)]
pub struct Grid {
    pub points: Vec<Point>,
    pub directions: Vec<Vector>,
}

impl Grid {
    /// A star grid on `a`: `layers` radial layers (the last on the
    /// boundary of `a`) along `points / layers` directions from its interior
    /// point, plus the interior point itself.
    pub fn star(a: &ConvexBody, points: usize, layers: usize, directions: usize) -> Result<Self> {
        let layers = layers.max(1);
        let c = a.interior_point().clone();
        let mut pts = vec![c.clone()];
        for u in sphere(a.dim(), (points / layers).max(2)) {
            let tp = a.chord(&c, &u)?.t_plus;
            for l in 1..=layers {
                pts.push(&c + &u * (tp * l as f64 / layers as f64));
            }
        }
        Ok(Grid {
            points: pts,
            directions: sphere(a.dim(), directions),
        })
    }

    /// 64 points x 64 directions in the plane, 256 x 256 in space.
    pub fn default_for(a: &ConvexBody) -> Result<Self> {
        match a.dim() {
            2 => Self::star(a, 64, 4, 64),
            _ => Self::star(a, 256, 4, 256),
        }
    }
}

/// Ratios `M(p, v) = F_member(p, v) / F_limit(p, v)` on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct NormRatioField {
    /// `ratios[i][j]` at point `i` and direction `j`.
    pub ratios: Vec<Vec<f64>>,
    pub inf_ratio: f64,
    pub sup_ratio: f64,
    /// `1 - inf M`.
    pub sup_deficit: f64,
}

/// Checks `a ⊂ limit ⊂ member` with membership probes.
pub fn check_nesting(member: &ConvexBody, limit: &ConvexBody, grid: &Grid) -> Result<()> {
    let n = limit.dim();
    if member.dim() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            got: member.dim(),
        });
    }
    for p in &grid.points {
        limit.check_dim(p)?;
        if !limit.contains_unchecked(p) {
            return Err(GeometryError::NestingViolation(format!(
                "grid point {:?} is outside the limit body",
                p.as_slice()
            )));
        }
    }
    let c = limit.interior_point();
    for u in sphere(n, 256) {
        let y = limit.boundary_point(c, &u)?;
        let y = c + (y - c) * (1.0 - 1e-9);
        if !member.contains_unchecked(&y) {
            return Err(GeometryError::NestingViolation(format!(
                "limit boundary point {:?} is outside the sequence member",
                y.as_slice()
            )));
        }
    }
    Ok(())
}

pub fn norm_ratio_field(
    member: &ConvexBody,
    limit: &ConvexBody,
    grid: &Grid,
) -> Result<NormRatioField> {
    check_nesting(member, limit, grid)?;
    let rows: Vec<Result<Vec<f64>>> = grid
        .points
        .par_iter()
        .map(|p| {
            grid.directions
                .iter()
                .map(|v| Ok(finsler_norm(member, p, v)? / finsler_norm(limit, p, v)?))
                .collect()
        })
        .collect();
    let ratios = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let flat = ratios.iter().flatten();
    let inf_ratio = flat.clone().cloned().fold(f64::INFINITY, f64::min);
    let sup_ratio = flat.cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(NormRatioField {
        ratios,
        inf_ratio,
        sup_ratio,
        sup_deficit: 1.0 - inf_ratio,
    })
}

/// One sequence member in [`density_convergence`].
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub index: usize,
    /// `inf M` over the grid.
    pub inf_norm_ratio: f64,
    pub sup_norm_ratio: f64,
    /// `sup |h_n / h_limit - 1|`.
    pub density_deviation: f64,
    pub min_density_ratio: f64,
    pub max_density_ratio: f64,
    /// `(inf M)^dim`.
    pub envelope_lower: f64,
    /// `envelope_lower <= h_n / h_limit <= 1 + tol` everywhere.
    pub within_envelope: bool,
    /// `M` did not decrease at any grid entry since the previous member.
    pub norm_monotone: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityConvergence {
    pub rows: Vec<ConvergenceRow>,
    pub deviation_monotone: bool,
    pub norm_monotone: bool,
    pub within_envelope: bool,
    pub final_deviation: f64,
}

/// Densities of each member relative to the limit on the grid points. Both
/// tangent-ball volumes are computed in the limit's frame at each point
/// with the same direction set, so pointwise ordering of the radii carries
/// over exactly to the volumes.
pub fn density_convergence(
    members: &[ConvexBody],
    limit: &ConvexBody,
    grid: &Grid,
) -> Result<DensityConvergence> {
    let n = limit.dim();
    let method = VolumeMethod::default_for(n);
    let frames = grid
        .points
        .par_iter()
        .map(|p| LocalFrame::at(limit, p))
        .collect::<Result<Vec<_>>>()?;
    let base = frames
        .par_iter()
        .map(|f| Ok(tub_volume_in_frame(limit, f, method)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let tol = 1e-12;
    let mut rows = Vec::with_capacity(members.len());
    let mut previous: Option<NormRatioField> = None;
    for (index, member) in members.iter().enumerate() {
        let field = norm_ratio_field(member, limit, grid)?;
        let ratios = frames
            .par_iter()
            .zip(base.par_iter())
            .map(|(f, v)| Ok(v / tub_volume_in_frame(member, f, method)?.value))
            .collect::<Result<Vec<f64>>>()?;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let envelope_lower = field.inf_ratio.powi(n as i32);
        let norm_monotone = previous.as_ref().is_none_or(|prev| {
            prev.ratios
                .iter()
                .flatten()
                .zip(field.ratios.iter().flatten())
                .all(|(a, b)| *b >= a - tol)
        });
        rows.push(ConvergenceRow {
            index,
            inf_norm_ratio: field.inf_ratio,
            sup_norm_ratio: field.sup_ratio,
            density_deviation: ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max),
            min_density_ratio: lo,
            max_density_ratio: hi,
            envelope_lower,
            within_envelope: lo >= envelope_lower - tol && hi <= 1.0 + tol,
            norm_monotone,
        });
        previous = Some(field);
    }
    let deviation_monotone = rows
        .windows(2)
        .all(|w| w[1].density_deviation <= w[0].density_deviation + tol);
    Ok(DensityConvergence {
        deviation_monotone,
        norm_monotone: rows.iter().all(|r| r.norm_monotone),
        within_envelope: rows.iter().all(|r| r.within_envelope),
        final_deviation: rows.last().map_or(0.0, |r| r.density_deviation),
        rows,
    })
}

/// `minkowski_ball(body, 1/k)` for each `k`.
pub fn smoothing_sequence(body: &ConvexBody, ks: &[usize]) -> Result<Vec<ConvexBody>> {
    ks.iter()
        .map(|&k| {
            if k == 0 {
                return Err(GeometryError::InvalidArgument("k must be positive".into()));
            }
            ConvexBody::minkowski_ball(body.clone(), 1.0 / k as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn identical_bodies_give_unit_ratios() {
        let disk = ConvexBody::unit_ball(2);
        let a = ConvexBody::ball(DVector::zeros(2), 0.5).unwrap();
        let grid = Grid::default_for(&a).unwrap();
        let f = norm_ratio_field(&disk, &disk, &grid).unwrap();
        assert_eq!(f.inf_ratio, 1.0);
        assert_eq!(f.sup_ratio, 1.0);
    }

    #[test]
    fn nesting_is_checked() {
        let disk = ConvexBody::unit_ball(2);
        let small = ConvexBody::ball(DVector::zeros(2), 0.9).unwrap();
        let a = ConvexBody::ball(DVector::zeros(2), 0.5).unwrap();
        let grid = Grid::default_for(&a).unwrap();
        assert!(matches!(
            norm_ratio_field(&small, &disk, &grid),
            Err(GeometryError::NestingViolation(_))
        ));
    }
}
