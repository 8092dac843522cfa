//! Real and complex scalars behind one trait.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::math;
use crate::rng::RngStream;

pub use num_complex::Complex64;

/// The ground field `K`: real symmetric or complex Hermitian matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Field constant appearing in every density exponent: 1 for real, 2 for complex.
    pub const fn k(self) -> u32 {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "real" => Some(Field::Real),
            "complex" => Some(Field::Complex),
            _ => None,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Matrix entry type. Implemented for `f64` and [`Complex64`]; real scalars
/// behave as complex scalars whose imaginary part is zero.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Default
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const FIELD: Field;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    /// `None` when `im != 0` for the real field.
    fn from_parts(re: f64, im: f64) -> Option<Self>;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;

    fn abs(self) -> f64 {
        math::sqrt(self.abs2())
    }

    fn scale(self, s: f64) -> Self {
        self * Self::from_real(s)
    }

    fn is_finite(self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }

    /// Principal `d`-th root. For reals the input must be positive.
    fn principal_root(self, d: usize) -> Self;

    /// Unit-variance draw: `E[|z|^2] = 1`. Complex draws are circularly
    /// symmetric with variance 1/2 on each of the real and imaginary parts.
    fn standard_normal(rng: &mut RngStream) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn abs(self) -> f64 {
        math::abs(self)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn principal_root(self, d: usize) -> Self {
        math::pow(self, 1.0 / d as f64)
    }
    fn standard_normal(rng: &mut RngStream) -> Self {
        rng.standard_normal()
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        Complex64::new(self.re * s, self.im * s)
    }
    fn principal_root(self, d: usize) -> Self {
        let r = math::pow(self.abs(), 1.0 / d as f64);
        let phi = math::atan2(self.im, self.re) / d as f64;
        Complex64::new(r * math::cos(phi), r * math::sin(phi))
    }
    fn standard_normal(rng: &mut RngStream) -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let re = rng.standard_normal();
        let im = rng.standard_normal();
        Complex64::new(re * h, im * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_constants() {
        assert_eq!(Field::Real.k(), 1);
        assert_eq!(Field::Complex.k(), 2);
        assert_eq!(Field::parse("complex"), Some(Field::Complex));
        assert_eq!(Field::parse("quaternion"), None);
    }

    #[test]
    fn complex_root_recovers_power() {
        let z = Complex64::new(-3.0, 4.0);
        let r = z.principal_root(3);
        let back = r * r * r;
        assert!((back - z).norm() < 1e-12);
    }

    #[test]
    fn real_rejects_imaginary_parts() {
        assert_eq!(f64::from_parts(1.0, 0.0), Some(1.0));
        assert_eq!(f64::from_parts(1.0, 1e-300), None);
    }
}
