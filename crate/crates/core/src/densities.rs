//! Log-densities of Wishart and projective Wishart laws with respect to
//! invariant measures, and the radial law of the distance to Σ̄ for 2×2
//! matrices.
//!
//! Conventions (k = 1 real, k = 2 complex):
//!
//! ```text
//! f_W(X)  ∝ det(X)^{kn/2} · exp(−c · tr(Σ⁻¹X))        c = 1/2 real, 1 complex
//! f_PW(x) ∝ (2 / tr(Σ⁻¹x))^{dkn/2}                    any d
//! f_PW(x) ∝ cosh(d(x, Σ̄))^{−kn}                       d = 2, scale 1/√2
//! radial  ∝ sinh(r)^k · cosh(r)^{−kn}                  d = 2
//! ```
//!
//! Everything is returned in log space.

use crate::manifold::{distance, SpdPoint, UnitDetPoint, DEFAULT_SCALE};
use crate::math::{self, ln_cosh, ln_sinh, LN_2, PI};
use crate::matrix::{HermMatrix, Mat};
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::rng::RngStream;
use crate::sampling::{sample_stabilizer, WishartParams};
use crate::scalar::{Field, Scalar};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub log_value: f64,
    pub normalized: bool,
}

impl DensityValue {
    fn unnormalized(log_value: f64) -> Self {
        Self {
            log_value,
            normalized: false,
        }
    }
}

/// Rate of the exponential factor: `e^{-tr/2}` for reals, `e^{-tr}` for the
/// circularly-symmetric complex convention.
pub fn exponential_rate(field: Field) -> f64 {
    match field {
        Field::Real => 0.5,
        Field::Complex => 1.0,
    }
}

fn check_dof<S: Scalar>(p: &WishartParams<S>) -> Result<()> {
    if p.n() < p.dim() {
        return Err(Error::DegreesOfFreedom { n: p.n(), d: p.dim() });
    }
    Ok(())
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// `tr(Σ⁻¹ x)`
pub fn trace_functional<S: Scalar>(x: &HermMatrix<S>, sigma: &SpdPoint<S>) -> Result<f64> {
    check_dims(sigma.dim(), x.dim())?;
    Ok(sigma.mat().inverse_pd()?.trace_product(x))
}

/// Unnormalized Wishart log-density with respect to the invariant measure
/// on the positive cone.
pub fn wishart_logdensity_invariant<S: Scalar>(x: &SpdPoint<S>, p: &WishartParams<S>) -> Result<DensityValue> {
    check_dof(p)?;
    let k = S::FIELD.k() as f64;
    let t = trace_functional(x.mat(), p.sigma())?;
    let log_det = math::log(x.det());
    Ok(DensityValue::unnormalized(
        0.5 * k * p.n() as f64 * log_det - exponential_rate(S::FIELD) * t,
    ))
}

/// Unnormalized projective log-density in trace form, valid for every `d`:
/// `(dkn/2) · (ln 2 − ln tr(Σ⁻¹x))`.
pub fn projective_logdensity_trace<S: Scalar>(x: &UnitDetPoint<S>, p: &WishartParams<S>) -> Result<DensityValue> {
    check_dof(p)?;
    let t = trace_functional(x.mat(), p.sigma())?;
    let a = 0.5 * (p.dim() as f64) * S::FIELD.k() as f64 * p.n() as f64;
    Ok(DensityValue::unnormalized(a * (LN_2 - math::log(t))))
}

/// Projective log-density obtained by integrating the Wishart density along
/// the ray through `x`: `ln ∫_0^∞ f_W(βx) (d/β) dβ`, evaluated by
/// quadrature in `u = ln β`. Differs from the trace form by a constant.
pub fn projective_logdensity_fiber<S: Scalar>(x: &UnitDetPoint<S>, p: &WishartParams<S>) -> Result<DensityValue> {
    check_dof(p)?;
    let d = p.dim() as f64;
    let a = 0.5 * d * S::FIELD.k() as f64 * p.n() as f64;
    let c = exponential_rate(S::FIELD) * trace_functional(x.mat(), p.sigma())?;
    // det(βx) = β^d, so f_W(βx)/β = exp(a u − c e^u) with u = ln β.
    let peak = math::log(a / c);
    let g_peak = a * peak - a;
    let g = |u: f64| math::exp(a * u - c * math::exp(u) - g_peak);
    let right = integrate_to_infinity(|s| g(peak + s), 0.0, 1e-14, 1e-16)?;
    let left = integrate_to_infinity(|s| g(peak - s), 0.0, 1e-14, 1e-16)?;
    Ok(DensityValue::unnormalized(
        math::log(d) + g_peak + math::log(left + right),
    ))
}

fn require_dim2(d: usize) -> Result<()> {
    if d != 2 {
        return Err(Error::RequiresDim2(d));
    }
    Ok(())
}

/// `−kn · ln cosh(d(x, Σ̄))` with the distance at scale 1/√2. 2×2 only.
pub fn projective_logdensity_cosh<S: Scalar>(x: &UnitDetPoint<S>, p: &WishartParams<S>) -> Result<DensityValue> {
    require_dim2(p.dim())?;
    check_dims(p.dim(), x.dim())?;
    check_dof(p)?;
    let r = distance(x, &p.sigma_bar(), DEFAULT_SCALE)?;
    let kn = (S::FIELD.k() as usize * p.n()) as f64;
    Ok(DensityValue::unnormalized(-kn * ln_cosh(r)))
}

/// Law of `r = d(x, Σ̄)` (scale 1/√2) for `x ~ PW(Σ, n)` with 2×2 matrices:
/// `pdf(r) = sinh(r)^k cosh(r)^{−kn} / Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLaw {
    field: Field,
    n: usize,
    z: f64,
}

impl RadialLaw {
    /// Integrable iff `k(n − 1) > 0`, i.e. `n >= 2` for either field.
    pub fn new(field: Field, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::NotIntegrable { n, field });
        }
        let mut law = Self { field, n, z: 1.0 };
        law.z = integrate_to_infinity(|r| law.unnormalized(r), 0.0, 1e-15, 1e-15)?;
        Ok(law)
    }

    pub fn for_params<S: Scalar>(p: &WishartParams<S>) -> Result<Self> {
        require_dim2(p.dim())?;
        Self::new(S::FIELD, p.n())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn k(&self) -> u32 {
        self.field.k()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `∫_0^∞ sinh^k cosh^{−kn}`.
    pub fn normalizer(&self) -> f64 {
        self.z
    }

    fn unnormalized(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let k = self.k() as f64;
        math::exp(k * ln_sinh(r) - k * self.n as f64 * ln_cosh(r))
    }

    pub fn log_pdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let k = self.k() as f64;
        k * ln_sinh(r) - k * self.n as f64 * ln_cosh(r) - math::log(self.z)
    }

    pub fn pdf(&self, r: f64) -> f64 {
        self.unnormalized(r) / self.z
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        // The integrand is unimodal; past a few units only the tail matters.
        let v = integrate(|s| self.pdf(s), 0.0, r, 1e-14).unwrap_or(f64::NAN);
        v.clamp(0.0, 1.0)
    }

    /// Smallest `r` with `cdf(r) >= p`, by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let mut hi = 1.0;
        while self.cdf(hi) < p && hi < 1e3 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Location of the maximum of the pdf, by golden-section search.
    pub fn mode(&self) -> f64 {
        let phi = 0.5 * (math::sqrt(5.0) - 1.0);
        let (mut a, mut b) = (1e-12, 10.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        for _ in 0..300 {
            if self.log_pdf(c) > self.log_pdf(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - phi * (b - a);
            d = a + phi * (b - a);
            if b - a < 1e-13 {
                break;
            }
        }
        0.5 * (a + b)
    }
}

/// Area of the geodesic sphere of radius `r` in the 2×2 unit-determinant
/// slice at distance scale 1/√2: `2π sinh r` (real) or `4π sinh² r` (complex).
pub fn shell_area(field: Field, r: f64) -> f64 {
    match field {
        Field::Real => 2.0 * PI * math::sinh(r),
        Field::Complex => {
            let s = math::sinh(r);
            4.0 * PI * s * s
        }
    }
}

/// `ln c` such that `c · cosh(d(x, Σ̄))^{−kn}` is a probability density with
/// respect to the Riemannian volume of the slice at distance scale `scale`.
///
/// Changing the scale multiplies lengths by `a = scale·√2`, so volumes pick
/// up `a^{k+1}`; the constant is recomputed here by quadrature in the scaled
/// radius rather than derived from the unit-scale value.
pub fn normalize_density_2d(field: Field, n: usize, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument("scale must be positive"));
    }
    RadialLaw::new(field, n)?;
    let a = scale * core::f64::consts::SQRT_2;
    let k = field.k() as i32;
    let kn = (field.k() as usize * n) as f64;
    let integrand = |rho: f64| {
        let r = rho / a;
        if r <= 0.0 {
            return 0.0;
        }
        shell_area(field, r) * math::pow(a, k as f64) * math::exp(-kn * ln_cosh(r))
    };
    let total = integrate_to_infinity(integrand, 0.0, 1e-15, 1e-15)?;
    Ok(-math::log(total))
}

/// The 2×2 point at distance `r` (scale 1/√2) from `base` in the direction
/// given by the special unitary `rot`: `b^{1/2} R diag(e^r, e^{−r}) R* b^{1/2}`.
pub fn point_at_radius<S: Scalar>(base: &UnitDetPoint<S>, rot: &Mat<S>, r: f64) -> Result<UnitDetPoint<S>> {
    require_dim2(base.dim())?;
    let core = HermMatrix::from_real_diag(&[math::exp(r), math::exp(-r)])?.congruence(rot);
    let frame = crate::manifold::Frame::at(base.mat())?;
    Ok(UnitDetPoint::rescaled(frame.unwhiten(&core), 1.0))
}

/// One draw from an importance proposal for the invariant volume on the 2×2
/// slice: radius `r ~ Exp(rate)` around `base`, direction from a Haar
/// rotation. Returns the point, its radius and the weight
/// `shell_area(r) / (rate · e^{−rate·r})`, so that averages of `g(x) · weight`
/// estimate `∫ g dν`.
pub fn sample_volume_proposal<S: Scalar>(
    base: &UnitDetPoint<S>,
    rate: f64,
    rng: &mut RngStream,
) -> Result<(UnitDetPoint<S>, f64, f64)> {
    require_dim2(base.dim())?;
    let r = rng.exponential(rate);
    let rot = sample_stabilizer::<S>(2, rng)?;
    let x = point_at_radius(base, rot.mat(), r)?;
    let weight = shell_area(S::FIELD, r) / (rate * math::exp(-rate * r));
    Ok((x, r, weight))
}
