//! Deterministic direction sets on the unit sphere and low-discrepancy
//! sequences.
//!
//! Every sampled computation in the crate draws its directions from here so
//! that results are reproducible without a seed. Sets produced by
//! [`sphere`] are antipodally symmetric: the second half is the negation of
//! the first.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Vector;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653; // pi * (3 - sqrt 5)

/// Radical inverse of `index` in the given base (van der Corput / Halton).
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// The `index`-th point of the Halton sequence in `[0,1)^dim`.
pub fn halton_point(index: u64, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|k| halton(index + 1, PRIMES[k % PRIMES.len()]))
        .collect()
}

/// `count` equally spaced unit vectors on the circle, starting at angle 0.
pub fn circle(count: usize) -> Vec<Vector> {
    (0..count)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / count as f64;
            DVector::from_vec(vec![a.cos(), a.sin()])
        })
        .collect()
}

/// Antipodally symmetric Fibonacci lattice on the 2-sphere.
fn fibonacci_sphere(count: usize) -> Vec<Vector> {
    let half = count.div_ceil(2).max(1);
    let mut upper = Vec::with_capacity(half);
    for k in 0..half {
        let z = 1.0 - (k as f64 + 0.5) / half as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = k as f64 * GOLDEN_ANGLE;
        upper.push(DVector::from_vec(vec![rho * phi.cos(), rho * phi.sin(), z]));
    }
    let mut out = upper.clone();
    out.extend(upper.into_iter().map(|v| -v));
    out
}

fn gaussian_sphere(dim: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = count.div_ceil(2).max(1);
    let mut upper = Vec::with_capacity(half);
    while upper.len() < half {
        let v = DVector::from_fn(dim, |_, _| standard_normal(&mut rng));
        let n = v.norm();
        if n > 1e-9 {
            upper.push(v / n);
        }
    }
    let mut out = upper.clone();
    out.extend(upper.into_iter().map(|v| -v));
    out
}

/// A well-spread, antipodally symmetric set of about `count` unit vectors in
/// dimension `dim` (circle for n = 2, Fibonacci lattice for n = 3).
pub fn sphere(dim: usize, count: usize) -> Vec<Vector> {
    match dim {
        0 => Vec::new(),
        1 => vec![
            DVector::from_element(1, 1.0),
            DVector::from_element(1, -1.0),
        ],
        2 => circle(count.max(2).next_multiple_of(2)),
        3 => fibonacci_sphere(count.max(2)),
        _ => gaussian_sphere(dim, count.max(2), 0x5eed_d1a5),
    }
}

/// Prefix-nested unit vectors: the first `k` vectors of `nested_sphere(n, m)`
/// do not depend on `m`. Used where monotonicity under refinement matters.
pub fn nested_sphere(dim: usize, count: usize) -> Vec<Vector> {
    match dim {
        0 => Vec::new(),
        1 => vec![
            DVector::from_element(1, 1.0),
            DVector::from_element(1, -1.0),
        ],
        2 => (0..count as u64)
            .map(|k| {
                let a = 2.0 * PI * halton(k, 2);
                DVector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        3 => (0..count as u64)
            .map(|k| {
                let z = 1.0 - 2.0 * halton(k, 2);
                let phi = 2.0 * PI * halton(k, 3);
                let rho = (1.0 - z * z).max(0.0).sqrt();
                DVector::from_vec(vec![rho * phi.cos(), rho * phi.sin(), z])
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x0e57_ed01);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let v = DVector::from_fn(dim, |_, _| standard_normal(&mut rng));
                let n = v.norm();
                if n > 1e-9 {
                    out.push(v / n);
                }
            }
            out
        }
    }
}

/// An upper bound on the covering angle of [`sphere`]`(dim, count)`: every
/// unit vector lies within this angle of some member of the set.
pub fn covering_angle(dim: usize, count: usize) -> Option<f64> {
    match dim {
        1 => Some(0.0),
        2 => Some(PI / count.max(2).next_multiple_of(2) as f64),
        3 => Some(3.2 / (count.max(2) as f64).sqrt()),
        _ => None,
    }
}

/// Surface area of the unit sphere in dimension `dim`.
pub fn sphere_area(dim: usize) -> f64 {
    dim as f64 * crate::measure::unit_ball_volume(dim)
}

/// An orthonormal basis of the complement of the unit vector `v`.
pub fn tangent_basis(v: &Vector) -> Vec<Vector> {
    let n = v.len();
    let mut basis: Vec<Vector> = Vec::with_capacity(n.saturating_sub(1));
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
    for k in candidates {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        e -= v * v[k];
        for b in &basis {
            let c = b.dot(&e);
            e -= b * c;
        }
        let norm = e.norm();
        if norm > 1e-8 {
            basis.push(e / norm);
        }
        if basis.len() + 1 == n {
            break;
        }
    }
    basis
}

/// Box-Muller standard normal draw.
pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        let v: f64 = rng.gen();
        if u > f64::MIN_POSITIVE {
            return (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_sets_are_unit_and_antipodal() {
        for dim in 1..=5 {
            let dirs = sphere(dim, 64);
            let half = dirs.len() / 2;
            for (k, d) in dirs.iter().enumerate() {
                assert!((d.norm() - 1.0).abs() < 1e-12);
                if dim != 2 {
                    let partner = if k < half { k + half } else { k - half };
                    assert!((d + &dirs[partner]).norm() < 1e-12);
                }
            }
        }
        // circle: opposite index is k + N/2
        let c = sphere(2, 16);
        for k in 0..8 {
            assert!((&c[k] + &c[k + 8]).norm() < 1e-12);
        }
    }

    #[test]
    fn nested_prefix_property() {
        for dim in [2, 3, 4] {
            let a = nested_sphere(dim, 32);
            let b = nested_sphere(dim, 64);
            for k in 0..32 {
                assert!((&a[k] - &b[k]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn covering_angle_bounds_hold_empirically() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for count in [64usize, 512, 2048] {
            let dirs = sphere(3, count);
            let bound = covering_angle(3, count).unwrap();
            let mut worst: f64 = 0.0;
            for _ in 0..20_000 {
                let v = DVector::from_fn(3, |_, _| standard_normal(&mut rng));
                let v = v.normalize();
                let best = dirs.iter().map(|d| d.dot(&v)).fold(-1.0, f64::max);
                worst = worst.max(best.clamp(-1.0, 1.0).acos());
            }
            assert!(worst < bound, "count {count}: {worst} >= {bound}");
        }
    }

    #[test]
    fn halton_first_values() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(1, 3) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let v = DVector::from_vec(vec![0.3, -0.4, 0.5, 0.1]).normalize();
        let b = tangent_basis(&v);
        assert_eq!(b.len(), 3);
        for (i, x) in b.iter().enumerate() {
            assert!(x.dot(&v).abs() < 1e-12);
            for y in b.iter().skip(i + 1) {
                assert!(x.dot(y).abs() < 1e-12);
            }
        }
    }
}
