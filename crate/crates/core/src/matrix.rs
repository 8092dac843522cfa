//! Dense square matrices and the Hermitian value type.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Mul};

use crate::math;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Row-major `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn from_vec(dim: usize, data: Vec<S>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if data.len() != dim * dim {
            return Err(Error::EntryCount {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![S::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_diag(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v.scale(s)).collect(),
        }
    }

    pub fn scaled_by(&self, s: S) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(s);
        }
    }

    pub fn trace(&self) -> S {
        (0..self.dim).fold(S::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|v| v.abs2()).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Set column `j` to `s` times itself.
    pub fn scale_column(&mut self, j: usize, s: S) {
        for i in 0..self.dim {
            self[(i, j)] *= s;
        }
    }

    /// Determinant by LU factorization with partial pivoting.
    pub fn det(&self) -> S {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = S::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    a[x * n + col]
                        .abs2()
                        .partial_cmp(&a[y * n + col].abs2())
                        .unwrap_or(core::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            let p = a[pivot * n + col];
            if p.abs2() == 0.0 {
                return S::zero();
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            det *= p;
            for row in col + 1..n {
                let f = a[row * n + col] / p;
                if f.abs2() == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= f * v;
                }
            }
        }
        det
    }

    /// `A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        (0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(x).fold(S::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.dim + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.dim + j]
    }
}

impl<S: Scalar> Mul for &Mat<S> {
    type Output = Mat<S>;

    fn mul(self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == S::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

/// Symmetric (real field) or Hermitian (complex field) matrix, `d >= 2`.
///
/// Hermitian structure is enforced at construction by averaging with the
/// adjoint and zeroing the imaginary part of the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix<S> {
    mat: Mat<S>,
}

impl<S: Scalar> HermMatrix<S> {
    pub fn new(mat: Mat<S>) -> Result<Self> {
        if mat.dim() < 2 {
            return Err(Error::InvalidDimension(mat.dim()));
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self::hermitize(mat))
    }

    pub(crate) fn hermitize(mut mat: Mat<S>) -> Self {
        let n = mat.dim();
        for i in 0..n {
            mat[(i, i)] = S::from_real(mat[(i, i)].re());
            for j in i + 1..n {
                let v = (mat[(i, j)] + mat[(j, i)].conj()).scale(0.5);
                mat[(i, j)] = v;
                mat[(j, i)] = v.conj();
            }
        }
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::identity(dim),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Result<Self> {
        let d: Vec<S> = diag.iter().map(|&v| S::from_real(v)).collect();
        Self::new(Mat::from_diag(&d))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn mat(&self) -> &Mat<S> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<S> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.frobenius_norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mat: self.mat.scaled(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::hermitize(self.mat.add(&other.mat))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::hermitize(self.mat.sub(&other.mat))
    }

    /// `G H G*`, re-hermitized.
    pub fn congruence(&self, g: &Mat<S>) -> Self {
        Self::hermitize(&(g * &self.mat) * &g.adjoint())
    }

    /// Real part of `tr(A B)` for Hermitian `A`, `B`.
    pub fn trace_product(&self, other: &Self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.mat[(i, j)] * other.mat[(j, i)]).re();
            }
        }
        acc
    }

    /// Lower-triangular `L` with `L L* = A` and real positive diagonal.
    pub fn cholesky(&self) -> Result<Mat<S>> {
        self.cholesky_with_det().map(|(l, _)| l)
    }

    /// Cholesky factor together with the product of the pivots, which is
    /// the determinant.
    fn cholesky_with_det(&self) -> Result<(Mat<S>, f64)> {
        let n = self.dim();
        let mut det = 1.0;
        let a = &self.mat;
        let mut l = Mat::<S>::zeros(n);
        for j in 0..n {
            let mut d = a[(j, j)].re();
            for k in 0..j {
                d -= l[(j, k)].abs2();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { index: j, pivot: d });
            }
            det *= d;
            let ljj = math::sqrt(d);
            l[(j, j)] = S::from_real(ljj);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s.scale(1.0 / ljj);
            }
        }
        Ok((l, det))
    }

    /// Inverse of a positive definite matrix through its Cholesky factor.
    pub fn inverse_pd(&self) -> Result<Self> {
        let l = self.cholesky()?;
        let linv = lower_triangular_inverse(&l);
        Ok(Self::hermitize(&linv.adjoint() * &linv))
    }

    /// Determinant: product of the Cholesky pivots for positive definite input,
    /// LU otherwise. Always real for Hermitian matrices.
    pub fn det(&self) -> f64 {
        match self.cholesky_with_det() {
            Ok((_, det)) => det,
            Err(_) => self.mat.det().re(),
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub fn lower_triangular_inverse<S: Scalar>(l: &Mat<S>) -> Mat<S> {
    let n = l.dim();
    let mut inv = Mat::zeros(n);
    for j in 0..n {
        inv[(j, j)] = S::one() / l[(j, j)];
        for i in j + 1..n {
            let mut s = S::zero();
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}
