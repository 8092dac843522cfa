//! The space of unit-determinant positive matrices and its affine-invariant
//! geometry.
//!
//! Positive definite matrices `X` are split by [`theta`] into a
//! unit-determinant representative `det(X)^{-1/d} X` and `log det X`. On the
//! unit-determinant slice the distance is
//!
//! ```text
//! d(x, y) = scale · ‖log(x^{-1/2} y x^{-1/2})‖_F
//! ```
//!
//! which is invariant under `x ↦ G x G*` for every invertible `G`. With
//! `scale = 1/√2` (the [`DEFAULT_SCALE`]) the 2×2 slice is the hyperbolic
//! plane (real) or hyperbolic 3-space (complex) of curvature −1.

use core::f64::consts::FRAC_1_SQRT_2;

use crate::eigen::{herm_eigen, SpectralFn};
use crate::math;
use crate::matrix::{HermMatrix, Mat};
use crate::scalar::Scalar;
use crate::{Error, Result};

pub const DEFAULT_SCALE: f64 = FRAC_1_SQRT_2;

/// Determinant tolerance for unit-determinant values.
pub const UNIT_DET_TOL: f64 = 1e-10;
/// Relative determinant error beyond which [`UnitDetPoint::new`] refuses to renormalize.
pub const UNIT_DET_REJECT: f64 = 1e-6;

/// Element of the positive definite cone.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdPoint<S> {
    mat: HermMatrix<S>,
}

impl<S: Scalar> SpdPoint<S> {
    pub fn new(mat: HermMatrix<S>) -> Result<Self> {
        mat.cholesky()?;
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: HermMatrix::identity(dim),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Result<Self> {
        Self::new(HermMatrix::from_real_diag(diag)?)
    }

    #[inline]
    pub fn mat(&self) -> &HermMatrix<S> {
        &self.mat
    }

    pub fn into_herm(self) -> HermMatrix<S> {
        self.mat
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn det(&self) -> f64 {
        self.mat.det()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.mat.scaled(c))
    }
}

/// Positive definite matrix with determinant 1, the canonical representative
/// of a ray `{αX : α > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDetPoint<S> {
    mat: HermMatrix<S>,
}

impl<S: Scalar> UnitDetPoint<S> {
    /// Accepts matrices whose determinant is within [`UNIT_DET_REJECT`] of 1
    /// and rescales them to determinant 1.
    pub fn new(mat: HermMatrix<S>) -> Result<Self> {
        let det = SpdPoint::new(mat.clone())?.det();
        if math::abs(det - 1.0) > UNIT_DET_REJECT {
            return Err(Error::NotUnitDet { det });
        }
        Ok(Self::rescaled(mat, det))
    }

    /// Rescales a positive definite `mat` whose determinant `det` is known
    /// without recomputing it.
    pub(crate) fn rescaled(mat: HermMatrix<S>, det: f64) -> Self {
        if det == 1.0 {
            return Self { mat };
        }
        let d = mat.dim();
        Self {
            mat: mat.scaled(math::inv_root(det, d)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: HermMatrix::identity(dim),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Result<Self> {
        Self::new(HermMatrix::from_real_diag(diag)?)
    }

    #[inline]
    pub fn mat(&self) -> &HermMatrix<S> {
        &self.mat
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn det(&self) -> f64 {
        self.mat.det()
    }

    pub fn to_spd(&self) -> SpdPoint<S> {
        SpdPoint {
            mat: self.mat.clone(),
        }
    }

    /// Entrywise comparison relative to the larger Frobenius norm.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.mat.sub(&other.mat).frobenius_norm()
                <= tol * self.mat.frobenius_norm().max(other.mat.frobenius_norm())
    }
}

/// `det(X)^{-1/d} X`.
pub fn project<S: Scalar>(x: &SpdPoint<S>) -> UnitDetPoint<S> {
    UnitDetPoint::rescaled(x.mat.clone(), x.det())
}

/// `X ↦ (project(X), log det X)`.
pub fn theta<S: Scalar>(x: &SpdPoint<S>) -> (UnitDetPoint<S>, f64) {
    let det = x.det();
    (UnitDetPoint::rescaled(x.mat.clone(), det), math::log(det))
}

/// `(x, t) ↦ e^{t/d} x`.
pub fn theta_inverse<S: Scalar>(x: &UnitDetPoint<S>, t: f64) -> SpdPoint<S> {
    let d = x.dim() as f64;
    SpdPoint {
        mat: x.mat.scaled(math::exp(t / d)),
    }
}

/// `x^{1/2}` and `x^{-1/2}` from one eigendecomposition.
#[derive(Debug, Clone)]
pub(crate) struct Frame<S> {
    pub sqrt: Mat<S>,
    pub inv_sqrt: Mat<S>,
}

impl<S: Scalar> Frame<S> {
    pub fn at(x: &HermMatrix<S>) -> Result<Self> {
        let e = herm_eigen(x)?;
        Ok(Self {
            sqrt: e.apply(SpectralFn::Sqrt)?.into_mat(),
            inv_sqrt: e.apply(SpectralFn::InvSqrt)?.into_mat(),
        })
    }

    /// `x^{-1/2} y x^{-1/2}`
    pub fn whiten(&self, y: &HermMatrix<S>) -> HermMatrix<S> {
        y.congruence(&self.inv_sqrt)
    }

    /// `x^{1/2} w x^{1/2}`
    pub fn unwhiten(&self, w: &HermMatrix<S>) -> HermMatrix<S> {
        w.congruence(&self.sqrt)
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// Affine-invariant distance `scale · ‖log(x^{-1/2} y x^{-1/2})‖_F`.
pub fn distance<S: Scalar>(x: &UnitDetPoint<S>, y: &UnitDetPoint<S>, scale: f64) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    if x == y {
        return Ok(0.0);
    }
    let frame = Frame::at(&x.mat)?;
    let log = herm_eigen(&frame.whiten(&y.mat))?.apply(SpectralFn::Log)?;
    Ok(scale * log.frobenius_norm())
}

/// Distance to the identity from the spectrum of `x` alone:
/// `scale · sqrt(Σ log² λ_i)`.
pub fn distance_to_identity_eigen<S: Scalar>(x: &UnitDetPoint<S>, scale: f64) -> Result<f64> {
    let e = herm_eigen(&x.mat)?;
    let s: f64 = e
        .eigenvalues
        .iter()
        .map(|&l| {
            let v = math::log(l);
            v * v
        })
        .sum();
    Ok(scale * math::sqrt(s))
}

/// Tangent vector to the unit-determinant slice: a Hermitian `v` with
/// `tr(x^{-1} v) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVec<S> {
    base: UnitDetPoint<S>,
    mat: HermMatrix<S>,
}

impl<S: Scalar> TangentVec<S> {
    pub fn new(base: UnitDetPoint<S>, mat: HermMatrix<S>) -> Result<Self> {
        check_dims(base.dim(), mat.dim())?;
        let inv = base.mat.inverse_pd()?;
        let trace = inv.trace_product(&mat);
        let tol = UNIT_DET_TOL * (inv.frobenius_norm() * mat.frobenius_norm()).max(1.0);
        if math::abs(trace) > tol {
            return Err(Error::NotTangent { trace });
        }
        Ok(Self { base, mat })
    }

    /// Removes the component along `x`: `v - tr(x^{-1} v)/d · x`.
    pub fn project(base: UnitDetPoint<S>, mat: HermMatrix<S>) -> Result<Self> {
        check_dims(base.dim(), mat.dim())?;
        let inv = base.mat.inverse_pd()?;
        let c = inv.trace_product(&mat) / base.dim() as f64;
        let mat = mat.sub(&base.mat.scaled(c));
        Ok(Self { base, mat })
    }

    pub fn zero(base: UnitDetPoint<S>) -> Self {
        let mat = HermMatrix::hermitize(Mat::zeros(base.dim()));
        Self { base, mat }
    }

    pub fn base(&self) -> &UnitDetPoint<S> {
        &self.base
    }

    pub fn mat(&self) -> &HermMatrix<S> {
        &self.mat
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            base: self.base.clone(),
            mat: self.mat.scaled(t),
        }
    }

    /// Metric norm at the base point: `scale · ‖x^{-1/2} v x^{-1/2}‖_F`.
    pub fn norm(&self, scale: f64) -> Result<f64> {
        let frame = Frame::at(&self.base.mat)?;
        Ok(scale * frame.whiten(&self.mat).frobenius_norm())
    }
}

/// `x^{1/2} log(x^{-1/2} y x^{-1/2}) x^{1/2}`
pub fn log_map<S: Scalar>(x: &UnitDetPoint<S>, y: &UnitDetPoint<S>) -> Result<TangentVec<S>> {
    check_dims(x.dim(), y.dim())?;
    let frame = Frame::at(&x.mat)?;
    let log = herm_eigen(&frame.whiten(&y.mat))?.apply(SpectralFn::Log)?;
    Ok(TangentVec {
        base: x.clone(),
        mat: frame.unwhiten(&log),
    })
}

/// `x^{1/2} exp(x^{-1/2} v x^{-1/2}) x^{1/2}`
pub fn exp_map<S: Scalar>(x: &UnitDetPoint<S>, v: &TangentVec<S>) -> Result<UnitDetPoint<S>> {
    if !v.base.approx_eq(x, 1e-12) {
        return Err(Error::BaseMismatch);
    }
    let frame = Frame::at(&x.mat)?;
    let eig = herm_eigen(&frame.whiten(&v.mat))?;
    // det(exp(W)) = e^{tr W}; recomputing it from the result loses accuracy
    // when the result is badly conditioned.
    let det = math::exp(eig.eigenvalues.iter().sum());
    let e = eig.apply(SpectralFn::Exp)?;
    Ok(UnitDetPoint::rescaled(frame.unwhiten(&e), det))
}

/// Point at fraction `t` along the geodesic from `x` to `y`.
pub fn geodesic<S: Scalar>(x: &UnitDetPoint<S>, y: &UnitDetPoint<S>, t: f64) -> Result<UnitDetPoint<S>> {
    exp_map(x, &log_map(x, y)?.scaled(t))
}

/// Invertible matrix acting by congruence `X ↦ G X G*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<S> {
    mat: Mat<S>,
    unit_det: bool,
}

impl<S: Scalar> GroupElement<S> {
    pub fn new(mat: Mat<S>) -> Result<Self> {
        if mat.dim() < 2 {
            return Err(Error::InvalidDimension(mat.dim()));
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let det = mat.det();
        if det.abs2() == 0.0 {
            return Err(Error::Singular);
        }
        let unit_det = (det - S::one()).abs() <= UNIT_DET_TOL;
        Ok(Self { mat, unit_det })
    }

    /// Rescales `mat` into the special linear group. Real matrices with
    /// negative determinant are first negated (odd `d`) or have their first
    /// row negated (even `d`).
    pub fn normalized(mut mat: Mat<S>) -> Result<Self> {
        let d = mat.dim();
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let mut det = mat.det();
        if det.abs2() == 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        if S::FIELD == crate::Field::Real && det.re() < 0.0 {
            if d % 2 == 1 {
                mat = mat.scaled(-1.0);
            } else {
                for j in 0..d {
                    mat[(0, j)] = -mat[(0, j)];
                }
            }
            det = -det;
        }
        let root = det.principal_root(d);
        Self::new(mat.scaled_by(S::one() / root))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::identity(dim),
            unit_det: true,
        }
    }

    pub fn mat(&self) -> &Mat<S> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn det(&self) -> S {
        self.mat.det()
    }

    pub fn is_unit_det(&self) -> bool {
        self.unit_det
    }

    /// `self · other`
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Self::new(&self.mat * &other.mat)
    }

    pub fn is_identity(&self) -> bool {
        self.mat == Mat::identity(self.dim())
    }

    pub fn act<P: Congruence<S>>(&self, p: &P) -> Result<P> {
        p.congruence_by(self)
    }
}

/// Values that invertible matrices act on by congruence.
pub trait Congruence<S: Scalar>: Sized {
    fn congruence_by(&self, g: &GroupElement<S>) -> Result<Self>;
}

impl<S: Scalar> Congruence<S> for SpdPoint<S> {
    fn congruence_by(&self, g: &GroupElement<S>) -> Result<Self> {
        check_dims(g.dim(), self.dim())?;
        SpdPoint::new(self.mat.congruence(&g.mat))
    }
}

impl<S: Scalar> Congruence<S> for UnitDetPoint<S> {
    fn congruence_by(&self, g: &GroupElement<S>) -> Result<Self> {
        check_dims(g.dim(), self.dim())?;
        if !g.unit_det {
            return Err(Error::NotUnitDetGroup {
                deviation: (g.det() - S::one()).abs(),
            });
        }
        if g.is_identity() {
            return Ok(self.clone());
        }
        Ok(UnitDetPoint::rescaled(self.mat.congruence(&g.mat), g.det().abs2()))
    }
}
