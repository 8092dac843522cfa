//! Gaussian, Wishart and projective Wishart samplers, plus Haar-random
//! elements of the stabilizer of Σ.

use alloc::vec::Vec;

use crate::manifold::{project, Frame, GroupElement, SpdPoint, UnitDetPoint};
use crate::math;
use crate::matrix::{HermMatrix, Mat};
use crate::rng::RngStream;
use crate::scalar::{Field, Scalar};
use crate::{Error, Result};

/// Parameters `(Σ, n)` of a Wishart law. The field is the scalar type.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartParams<S> {
    sigma: SpdPoint<S>,
    n: usize,
}

impl<S: Scalar> WishartParams<S> {
    pub fn new(sigma: SpdPoint<S>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DegreesOfFreedom {
                n,
                d: sigma.dim(),
            });
        }
        Ok(Self { sigma, n })
    }

    pub fn sigma(&self) -> &SpdPoint<S> {
        &self.sigma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn field(&self) -> Field {
        S::FIELD
    }

    /// Unit-determinant representative of Σ.
    pub fn sigma_bar(&self) -> UnitDetPoint<S> {
        project(&self.sigma)
    }
}

/// Sampler with the Cholesky factor of Σ computed once.
#[derive(Debug, Clone)]
pub struct WishartSampler<S> {
    params: WishartParams<S>,
    chol: Mat<S>,
}

impl<S: Scalar> WishartSampler<S> {
    /// Fails unless `n >= d`, the range where samples are positive definite
    /// almost surely.
    pub fn new(params: WishartParams<S>) -> Result<Self> {
        let d = params.dim();
        if params.n < d {
            return Err(Error::DegreesOfFreedom { n: params.n, d });
        }
        let chol = params.sigma.mat().cholesky()?;
        Ok(Self { params, chol })
    }

    pub fn params(&self) -> &WishartParams<S> {
        &self.params
    }

    /// `Y = L Z` with `L L* = Σ` and `Z` standard normal.
    pub fn gaussian(&self, rng: &mut RngStream) -> Vec<S> {
        gaussian_with_factor(&self.chol, rng)
    }

    /// `X = Σ_{i=1}^{n} Y_i Y_i*`.
    pub fn sample(&self, rng: &mut RngStream) -> Result<SpdPoint<S>> {
        let d = self.params.dim();
        let mut x = Mat::<S>::zeros(d);
        for _ in 0..self.params.n {
            let y = self.gaussian(rng);
            for i in 0..d {
                for j in 0..d {
                    x[(i, j)] += y[i] * y[j].conj();
                }
            }
        }
        SpdPoint::new(HermMatrix::new(x)?)
    }

    pub fn sample_projective(&self, rng: &mut RngStream) -> Result<UnitDetPoint<S>> {
        Ok(project(&self.sample(rng)?))
    }

    /// `count` consecutive projective samples from one stream.
    pub fn sample_projective_batch(&self, count: usize, rng: &mut RngStream) -> Result<Vec<UnitDetPoint<S>>> {
        (0..count).map(|_| self.sample_projective(rng)).collect()
    }
}

fn gaussian_with_factor<S: Scalar>(l: &Mat<S>, rng: &mut RngStream) -> Vec<S> {
    let z: Vec<S> = (0..l.dim()).map(|_| S::standard_normal(rng)).collect();
    l.mul_vec(&z)
}

/// One draw of `N(0, Σ)`.
pub fn sample_gaussian<S: Scalar>(sigma: &SpdPoint<S>, rng: &mut RngStream) -> Result<Vec<S>> {
    Ok(gaussian_with_factor(&sigma.mat().cholesky()?, rng))
}

pub fn sample_wishart<S: Scalar>(p: &WishartParams<S>, rng: &mut RngStream) -> Result<SpdPoint<S>> {
    WishartSampler::new(p.clone())?.sample(rng)
}

pub fn sample_projective_wishart<S: Scalar>(
    p: &WishartParams<S>,
    rng: &mut RngStream,
) -> Result<UnitDetPoint<S>> {
    WishartSampler::new(p.clone())?.sample_projective(rng)
}

fn gaussian_matrix<S: Scalar>(d: usize, rng: &mut RngStream) -> Mat<S> {
    Mat::from_fn(d, |_, _| S::standard_normal(rng))
}

/// Haar-random element of SO(d) (real) or SU(d) (complex).
///
/// Gram–Schmidt on the columns of a Gaussian matrix gives a triangular
/// factor with positive diagonal, hence a Haar unitary; the last column is
/// then multiplied by the conjugate phase of the determinant.
pub fn sample_stabilizer<S: Scalar>(d: usize, rng: &mut RngStream) -> Result<GroupElement<S>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let mut q = gaussian_matrix::<S>(d, rng);
    for j in 0..d {
        for k in 0..j {
            // <q_k, q_j>
            let mut dot = S::zero();
            for i in 0..d {
                dot += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..d {
                let qk = q[(i, k)];
                q[(i, j)] -= qk * dot;
            }
        }
        let norm = math::sqrt((0..d).map(|i| q[(i, j)].abs2()).sum());
        q.scale_column(j, S::from_real(1.0 / norm));
    }
    let det = q.det();
    let phase = det.conj().scale(1.0 / det.abs());
    q.scale_column(d - 1, phase);
    GroupElement::new(q)
}

/// `‖R R* − I‖_F`
pub fn unitarity_residual<S: Scalar>(r: &Mat<S>) -> f64 {
    (r * &r.adjoint()).sub(&Mat::identity(r.dim())).frobenius_norm()
}

/// `Σ^{1/2} R Σ^{-1/2}`, an element of the stabilizer of Σ.
pub fn conjugate_stabilizer<S: Scalar>(r: &GroupElement<S>, sigma: &SpdPoint<S>) -> Result<GroupElement<S>> {
    if r.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: r.dim(),
        });
    }
    let residual = unitarity_residual(r.mat()).max((r.det() - S::one()).abs());
    if residual > 1e-10 {
        return Err(Error::NotOrthonormal { residual });
    }
    let frame = Frame::at(sigma.mat())?;
    GroupElement::new(&(&frame.sqrt * r.mat()) * &frame.inv_sqrt)
}

/// Random positive definite matrix `A A*/d + I/4` with Gaussian `A`.
pub fn random_spd<S: Scalar>(d: usize, rng: &mut RngStream) -> Result<SpdPoint<S>> {
    let a = gaussian_matrix::<S>(d, rng);
    let m = (&a * &a.adjoint()).scaled(1.0 / d as f64).add(&Mat::identity(d).scaled(0.25));
    SpdPoint::new(HermMatrix::new(m)?)
}

/// Random element of the special linear group: a Gaussian matrix rescaled
/// to determinant 1.
pub fn random_unit_det_group<S: Scalar>(d: usize, rng: &mut RngStream) -> Result<GroupElement<S>> {
    loop {
        match GroupElement::normalized(gaussian_matrix::<S>(d, rng)) {
            Err(Error::Singular) => continue,
            other => return other,
        }
    }
}

/// Random unit-determinant point at moderate distance from the identity.
pub fn random_unit_det_point<S: Scalar>(d: usize, rng: &mut RngStream) -> Result<UnitDetPoint<S>> {
    Ok(project(&random_spd::<S>(d, rng)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{distance, DEFAULT_SCALE};
    use crate::scalar::Complex64;

    #[test]
    fn wishart_requires_n_at_least_d() {
        let p = WishartParams::new(SpdPoint::<f64>::identity(3), 2).unwrap();
        assert_eq!(
            WishartSampler::new(p).unwrap_err(),
            Error::DegreesOfFreedom { n: 2, d: 3 }
        );
        assert!(WishartParams::new(SpdPoint::<f64>::identity(2), 0).is_err());
    }

    #[test]
    fn gaussian_is_deterministic() {
        let sigma = SpdPoint::<Complex64>::identity(3);
        let a = sample_gaussian(&sigma, &mut RngStream::new(5, 0)).unwrap();
        let b = sample_gaussian(&sigma, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stabilizer_is_special_unitary() {
        let mut rng = RngStream::new(11, 0);
        for d in 2..5 {
            for _ in 0..50 {
                let r = sample_stabilizer::<f64>(d, &mut rng).unwrap();
                assert!(unitarity_residual(r.mat()) < 1e-10);
                assert!((r.det() - 1.0).abs() < 1e-10);
                let c = sample_stabilizer::<Complex64>(d, &mut rng).unwrap();
                assert!(unitarity_residual(c.mat()) < 1e-10);
                assert!((c.det() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
                let i = UnitDetPoint::identity(d);
                assert!(c.act(&i).unwrap().approx_eq(&i, 1e-12));
            }
        }
    }

    #[test]
    fn conjugated_stabilizer_fixes_sigma() {
        let mut rng = RngStream::new(3, 1);
        let sigma = random_spd::<Complex64>(3, &mut rng).unwrap();
        let sbar = project(&sigma);
        let r = sample_stabilizer::<Complex64>(3, &mut rng).unwrap();
        let rs = conjugate_stabilizer(&r, &sigma).unwrap();
        assert!((rs.det() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        let moved = rs.act(&sigma).unwrap();
        assert!(moved.mat().sub(sigma.mat()).frobenius_norm() < 1e-9);
        assert!(rs.act(&sbar).unwrap().approx_eq(&sbar, 1e-9));

        let x = random_unit_det_point::<Complex64>(3, &mut rng).unwrap();
        let d0 = distance(&x, &sbar, DEFAULT_SCALE).unwrap();
        let d1 = distance(&rs.act(&x).unwrap(), &sbar, DEFAULT_SCALE).unwrap();
        assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn identity_sigma_gives_back_r() {
        let mut rng = RngStream::new(8, 0);
        let r = sample_stabilizer::<f64>(2, &mut rng).unwrap();
        let rs = conjugate_stabilizer(&r, &SpdPoint::identity(2)).unwrap();
        assert!(rs.mat().sub(r.mat()).frobenius_norm() < 1e-15);
    }

    #[test]
    fn conjugate_stabilizer_rejects_non_orthonormal() {
        let g = GroupElement::new(Mat::from_diag(&[2.0, 0.5])).unwrap();
        assert!(matches!(
            conjugate_stabilizer(&g, &SpdPoint::identity(2)),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
