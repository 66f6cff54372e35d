//! Dense Hermitian helpers over nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// max |M_jk − conj(M_kj)|.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut d: f64 = 0.0;
    for j in 0..n {
        for k in j..n {
            d = d.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    d
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|j| m[(j, j)].re).sum()
}

/// (M + M^H)/2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Ascending eigenvalues with matching unit eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vecs)
}

/// Positive-definite Hermitian factorization with a condition estimate.
pub struct HermitianFactor {
    chol: nalgebra::linalg::Cholesky<Complex64, nalgebra::Dyn>,
    pub condition: f64,
}

impl HermitianFactor {
    /// Fails with `Indefinite` when Cholesky breaks down and `IllConditioned` above `max_condition`.
    /// The condition number is estimated by power and inverse iteration.
    pub fn new(m: &CMatrix, max_condition: f64) -> Result<Self> {
        let h = hermitian_part(m);
        let n = h.nrows();
        if n == 0 {
            return Err(Error::Indefinite);
        }
        let chol = h.clone().cholesky().ok_or(Error::Indefinite)?;
        // the complex factorization takes square roots of negative pivots instead of failing
        let l = chol.l_dirty();
        if (0..n).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
            return Err(Error::Indefinite);
        }
        let start = CVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * (i % 7) as f64, 0.05 * (i % 3) as f64));
        let hi = power_iteration(|v| &h * v, &start, 25);
        let inv = power_iteration(|v| chol.solve(v), &start, 25);
        if !(hi > 0.0 && inv > 0.0 && inv.is_finite()) {
            return Err(Error::Indefinite);
        }
        let condition = hi * inv;
        if condition > max_condition {
            return Err(Error::IllConditioned(condition));
        }
        Ok(HermitianFactor { chol, condition })
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        self.chol.solve(b)
    }

    pub fn l(&self) -> CMatrix {
        self.chol.l()
    }
}

/// Largest eigenvalue magnitude of a Hermitian operator by power iteration.
fn power_iteration<F: Fn(&CVector) -> CVector>(apply: F, start: &CVector, iters: usize) -> f64 {
    let mut v = start.normalize();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = apply(&v);
        let nw = w.norm();
        if nw == 0.0 || !nw.is_finite() {
            return nw;
        }
        lambda = v.dotc(&w).re;
        v = w / Complex64::new(nw, 0.0);
    }
    lambda.abs().max(apply(&v).norm())
}

/// Solves L X = B for lower-triangular L.
pub fn solve_lower(l: &CMatrix, b: &CMatrix) -> CMatrix {
    l.solve_lower_triangular(b).expect("nonsingular triangular factor")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_of_two_by_two() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let v = vecs.column(0);
        assert!((v[0] + v[1]).norm() < 1e-12);
    }

    #[test]
    fn complex_hermitian_eigen() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let r = &m * vecs.column(0) - vecs.column(0) * c(vals[0], 0.0);
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn factor_errors() {
        let indef = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(HermitianFactor::new(&indef, 1e12), Err(Error::Indefinite)));
        let ill = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(1e-14, 0.0)]));
        assert!(matches!(HermitianFactor::new(&ill, 1e12), Err(Error::IllConditioned(_))));
        let ok = HermitianFactor::new(&CMatrix::identity(3, 3), 1e12).unwrap();
        assert!((ok.condition - 1.0).abs() < 1e-12);
    }
}
