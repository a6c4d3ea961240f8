//! Small numeric utilities: symmetric matrix functions, compensated sums and
//! one-dimensional golden-section search.

use nalgebra::{DMatrix, SymmetricEigen};

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let d = eig.eigenvalues.map(f);
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Principal square root of a symmetric positive semidefinite matrix.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(m, |x| x.max(0.0).sqrt())
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn sym_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lo = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal function on `[a, b]` by golden-section search.
/// Returns the best abscissa seen together with its value.
pub fn golden_max(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best_f {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best_f {
                best_x = d;
                best_f = fd;
            }
        }
    }
    (best_x, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let r = sym_sqrt(&m);
        assert!((&r * &r - &m).norm() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn golden_finds_peak() {
        let (x, fx) = golden_max(|x| -(x - 0.3).powi(2), -1.0, 2.0, 1e-10, 200);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
    }
}
