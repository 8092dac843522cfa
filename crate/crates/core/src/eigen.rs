//! Cyclic Jacobi eigensolver for Hermitian matrices and spectral matrix
//! functions.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real rotation, so the same code
//! serves both fields (for reals the phase is `±1`). Sweep order is fixed,
//! which makes the output a pure function of the input bits.

use alloc::vec::Vec;

use crate::math;
use crate::matrix::{HermMatrix, Mat};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Stop once the off-diagonal Frobenius mass drops below this fraction of `‖A‖_F`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 100;
/// Eigenvalues below `POSITIVITY_FLOOR * λ_max` are treated as non-positive
/// by [`SpectralFn`]s that need a positive spectrum.
pub const POSITIVITY_FLOOR: f64 = 1e-13;

/// `A = V diag(λ) V*` with ascending `λ` and orthonormal columns of `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp<S> {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<S>,
}

fn off_diagonal_norm<S: Scalar>(a: &Mat<S>) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].abs2();
            }
        }
    }
    math::sqrt(s)
}

pub fn herm_eigen<S: Scalar>(a: &HermMatrix<S>) -> Result<EigenDecomp<S>> {
    let n = a.dim();
    let mut m = a.mat().clone();
    let mut v = Mat::<S>::identity(n);
    let scale = m.frobenius_norm();
    let target = OFF_DIAGONAL_TOL * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re()).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = Mat::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// Annihilate `m[p][q]` with `m ← U* m U`, `v ← v U`.
fn rotate<S: Scalar>(m: &mut Mat<S>, v: &mut Mat<S>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let g = apq.abs();
    if g == 0.0 {
        return;
    }
    let n = m.dim();
    let u = apq.scale(1.0 / g);
    let app = m[(p, p)].re();
    let aqq = m[(q, q)].re();
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta >= 0.0 {
        1.0 / (theta + math::sqrt(theta * theta + 1.0))
    } else {
        -1.0 / (-theta + math::sqrt(theta * theta + 1.0))
    };
    let c = 1.0 / math::sqrt(t * t + 1.0);
    let s = t * c;
    let cs = S::from_real(c);
    let ss = S::from_real(s);
    let ubar = u.conj();

    // U restricted to (p, q): [[c, s], [-s ū, c ū]]
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * cs - akq * ss * ubar;
        m[(k, q)] = akp * ss + akq * cs * ubar;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * cs - aqk * ss * u;
        m[(q, k)] = apk * ss + aqk * cs * u;
    }
    m[(p, q)] = S::zero();
    m[(q, p)] = S::zero();
    m[(p, p)] = S::from_real(app - t * g);
    m[(q, q)] = S::from_real(aqq + t * g);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * cs - vkq * ss * ubar;
        v[(k, q)] = vkp * ss + vkq * cs * ubar;
    }
}

impl<S: Scalar> EigenDecomp<S> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(λ)) V*`, re-hermitized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermMatrix<S> {
        let n = self.dim();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = S::zero();
                for (k, &w) in fl.iter().enumerate() {
                    acc += (v[(i, k)] * v[(j, k)].conj()).scale(w);
                }
                out[(i, j)] = acc;
                if i != j {
                    out[(j, i)] = acc.conj();
                }
            }
        }
        HermMatrix::hermitize(out)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    fn check_positive(&self) -> Result<()> {
        let max = self.max_eigenvalue();
        let floor = POSITIVITY_FLOOR * max;
        let min = self.min_eigenvalue();
        if !(max > 0.0) || min <= floor {
            return Err(Error::Domain {
                eigenvalue: min,
                floor,
            });
        }
        Ok(())
    }

    pub fn apply(&self, f: SpectralFn) -> Result<HermMatrix<S>> {
        if f.needs_positive_spectrum() {
            self.check_positive()?;
        }
        Ok(self.map(|x| f.eval(x)))
    }
}

/// Scalar functions lifted to Hermitian matrices through the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFn {
    Log,
    Exp,
    Sqrt,
    InvSqrt,
    Pow(f64),
}

impl SpectralFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            SpectralFn::Log => math::log(x),
            SpectralFn::Exp => math::exp(x),
            SpectralFn::Sqrt => math::sqrt(x),
            SpectralFn::InvSqrt => 1.0 / math::sqrt(x),
            SpectralFn::Pow(p) => math::pow(x, p),
        }
    }

    /// Log, negative powers and fractional powers need `λ > 0`.
    pub fn needs_positive_spectrum(self) -> bool {
        match self {
            SpectralFn::Log | SpectralFn::Sqrt | SpectralFn::InvSqrt => true,
            SpectralFn::Exp => false,
            SpectralFn::Pow(p) => p < 0.0 || p != libm::trunc(p),
        }
    }
}

/// `f(A)` for Hermitian `A`.
pub fn matrix_function<S: Scalar>(a: &HermMatrix<S>, f: SpectralFn) -> Result<HermMatrix<S>> {
    herm_eigen(a)?.apply(f)
}
