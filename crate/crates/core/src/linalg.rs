//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest eigenvalue over smallest, for a Hermitian positive definite matrix.
pub fn condition_number(m: &CMat) -> f64 {
    let ev = hermitian_eigenvalues(m);
    ev[ev.len() - 1] / ev[0]
}

/// Lower-triangular `L` with `m = L L^H`.
pub fn cholesky(m: &CMat) -> Result<CMat> {
    if !(hermitian_eigenvalues(m)[0] > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    nalgebra::Cholesky::new(m.clone())
        .map(|c| c.unpack())
        .ok_or(Error::NotPositiveDefinite)
}

pub fn max_singular_value(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Top Takagi pair of a complex symmetric matrix `b`: the largest singular
/// value `s` and a unit vector `u` with `u^T b u = s`.
///
/// Writing `b = P + iQ` and `u = x + iy`, `Re(u^T b u)` is the quadratic form
/// of the real symmetric matrix `[[P, -Q], [-Q, -P]]`, whose spectrum is
/// `{+-s_i}`.
pub fn takagi_top(b: &CMat) -> (f64, CVec) {
    let n = b.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let p = 0.5 * (b[(i, j)].re + b[(j, i)].re);
            let q = 0.5 * (b[(i, j)].im + b[(j, i)].im);
            m[(i, j)] = p;
            m[(i, n + j)] = -q;
            m[(n + i, j)] = -q;
            m[(n + i, n + j)] = -p;
        }
    }
    let eig = SymmetricEigen::new(m);
    let (k, s) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty matrix");
    let v = eig.eigenvectors.column(k);
    let u = CVec::from_fn(n, |i, _| Complex64::new(v[i], v[n + i]));
    (s.max(0.0), u)
}

/// `x^T m y` without conjugation.
pub fn bilinear(m: &CMat, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let mut s = ZERO;
    for i in 0..x.len() {
        for j in 0..y.len() {
            s += x[i] * m[(i, j)] * y[j];
        }
    }
    s
}

/// `x^T m conj(y)`.
pub fn sesquilinear(m: &CMat, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let mut s = ZERO;
    for i in 0..x.len() {
        for j in 0..y.len() {
            s += x[i] * m[(i, j)] * y[j].conj();
        }
    }
    s
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn takagi_of_diagonal_phase_matrix() {
        let b = CMat::from_row_slice(2, 2, &[c(0.0, 3.0), ZERO, ZERO, c(-1.0, 0.0)]);
        let (s, u) = takagi_top(&b);
        assert!((s - 3.0).abs() < 1e-14);
        let v = (u.transpose() * &b * &u)[(0, 0)];
        assert!((v - c(3.0, 0.0)).norm() < 1e-13);
        assert!((u.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn takagi_matches_svd() {
        let b = CMat::from_row_slice(
            3,
            3,
            &[
                c(0.3, 0.1),
                c(-0.2, 0.7),
                c(1.1, 0.0),
                c(-0.2, 0.7),
                c(0.5, -0.4),
                c(0.0, 0.2),
                c(1.1, 0.0),
                c(0.0, 0.2),
                c(-0.9, 0.3),
            ],
        );
        let (s, u) = takagi_top(&b);
        assert!((s - max_singular_value(&b)).abs() < 1e-12);
        let v = (u.transpose() * &b * &u)[(0, 0)];
        assert!((v.norm() - s).abs() < 1e-12);
    }

    #[test]
    fn cholesky_reconstructs() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.5, 0.0)]);
        let l = cholesky(&m).unwrap();
        assert!(max_abs(&(&l * l.adjoint() - &m)) < 1e-14);
        let bad = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert_eq!(cholesky(&bad), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = CMat::from_row_slice(2, 2, &[c(3.0, 0.0), ZERO, ZERO, ONE]);
        assert_eq!(hermitian_eigenvalues(&m), vec![1.0, 3.0]);
        assert!((condition_number(&m) - 3.0).abs() < 1e-15);
    }
}
