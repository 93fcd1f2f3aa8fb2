//! Small dense symmetric matrices for the Newton solver.
//!
//! Dimensions here are `2^p + q`, i.e. tens of rows at most. Storage is a
//! plain row-major buffer generic over the scalar; factorizations and
//! eigenvalues are delegated to nalgebra.

use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Scalar> SquareMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![F::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> F {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `x^T M y`.
    pub fn quadratic_form(&self, x: &[F], y: &[F]) -> F {
        let mut acc = F::zero();
        for i in 0..self.n {
            let r: F = self.row(i).iter().zip(y).map(|(&a, &b)| a * b).sum();
            acc = acc + x[i] * r;
        }
        acc
    }

    pub fn mul_vec(&self, x: &[F]) -> Vec<F> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    /// Adds `w * x x^T` (rank-one update of the lower and upper triangle).
    pub(crate) fn add_outer(&mut self, x: &[F], w: F) {
        let n = self.n;
        for i in 0..n {
            let xi = x[i] * w;
            if xi == F::zero() {
                continue;
            }
            let row = &mut self.data[i * n..(i + 1) * n];
            for j in 0..=i {
                row[j] = row[j] + xi * x[j];
            }
        }
    }

    /// Copies the lower triangle into the upper one.
    pub(crate) fn symmetrize_from_lower(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = self[(i, j)];
                self[(j, i)] = v;
            }
        }
    }

    pub fn is_symmetric(&self, tol: F) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Principal submatrix on the given index range.
    pub fn block(&self, range: std::ops::Range<usize>) -> Self {
        let k = range.len();
        let mut out = Self::zeros(k);
        for (a, i) in range.clone().enumerate() {
            for (b, j) in range.clone().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }
}

impl<F> std::ops::Index<(usize, usize)> for SquareMatrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.n + j]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for SquareMatrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.n + j]
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Factorizations run in `f64` through nalgebra whatever the storage
/// scalar, so single-precision fits still get double-precision solves.
#[derive(Debug, Clone)]
pub struct Cholesky<F> {
    inner: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    _scalar: std::marker::PhantomData<F>,
}

fn to_dmatrix<F: Scalar>(a: &SquareMatrix<F>) -> DMatrix<f64> {
    DMatrix::from_fn(a.dim(), a.dim(), |i, j| a[(i, j)].as_f64())
}

impl<F: Scalar> Cholesky<F> {
    /// `None` when a pivot is not positive or an entry is not finite.
    pub fn new(a: &SquareMatrix<F>) -> Option<Self> {
        let m = to_dmatrix(a);
        if m.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let inner = nalgebra::Cholesky::new(m)?;
        if inner.l_dirty().diagonal().iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return None;
        }
        Some(Self { inner, _scalar: std::marker::PhantomData })
    }

    /// Smallest diagonal entry of the lower factor.
    pub fn min_pivot(&self) -> F {
        F::lit(self.inner.l_dirty().diagonal().min())
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let rhs = DVector::from_iterator(b.len(), b.iter().map(|x| x.as_f64()));
        self.inner.solve(&rhs).iter().map(|&x| F::lit(x)).collect()
    }

    pub fn inverse(&self) -> SquareMatrix<F> {
        let inv = self.inner.inverse();
        let n = inv.nrows();
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                // Average out rounding asymmetry.
                out[(i, j)] = F::lit(0.5 * (inv[(i, j)] + inv[(j, i)]));
            }
        }
        out
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues<F: Scalar>(a: &SquareMatrix<F>) -> Vec<F> {
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(to_dmatrix(a)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev.into_iter().map(F::lit).collect()
}

/// Spectral condition number `max|λ| / min|λ|`; infinite when singular.
pub fn condition_number<F: Scalar>(a: &SquareMatrix<F>) -> F {
    let ev = symmetric_eigenvalues(a);
    let max = ev.iter().fold(F::zero(), |m, x| m.max(x.abs()));
    let min = ev.iter().fold(F::infinity(), |m, x| m.min(x.abs()));
    if min == F::zero() {
        F::infinity()
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> SquareMatrix<f64> {
        SquareMatrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ])
    }

    #[test]
    fn cholesky_inverse_is_inverse() {
        let a = spd();
        let inv = Cholesky::new(&a).unwrap().inverse();
        for i in 0..3 {
            let col: Vec<f64> = (0..3).map(|k| inv[(k, i)]).collect();
            let e = a.mul_vec(&col);
            for (k, x) in e.iter().enumerate() {
                let want = if k == i { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-14);
            }
        }
        assert!(inv.is_symmetric(0.0));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(Cholesky::new(&a).is_none());
        let singular = SquareMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(Cholesky::new(&singular).is_none());
    }

    #[test]
    fn symmetric_eigenvalues_of_small_matrices() {
        let a = SquareMatrix::from_rows(&[vec![2.0f64, 1.0], vec![1.0, 2.0]]);
        let ev = symmetric_eigenvalues(&a);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert!((condition_number(&a) - 3.0).abs() < 1e-13);
        let ev = symmetric_eigenvalues(&spd());
        let sum: f64 = ev.iter().sum();
        assert!((sum - 9.0).abs() < 1e-12);
        assert!(ev.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn block_extracts_principal_submatrix() {
        let b = spd().block(1..3);
        assert_eq!(b, SquareMatrix::from_rows(&[vec![3.0, 0.2], vec![0.2, 2.0]]));
    }
}
