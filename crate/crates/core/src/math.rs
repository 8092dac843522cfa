//! Float functions for `no_std`, backed by `libm`.

pub use libm::{atan2, cos, exp, fabs as abs, frexp, ldexp, log, log1p, pow, sin, sinh, sqrt};

pub const PI: f64 = core::f64::consts::PI;
pub const LN_2: f64 = core::f64::consts::LN_2;

/// `ln cosh(x)` without overflow for large `|x|`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = abs(x);
    a + log1p(exp(-2.0 * a)) - LN_2
}

/// `ln sinh(x)` for `x > 0`, stable at both ends.
pub fn ln_sinh(x: f64) -> f64 {
    if x < 1.0 {
        log(sinh(x))
    } else {
        x + log1p(-exp(-2.0 * x)) - LN_2
    }
}

/// `x^{-1/d}` for `x > 0`. The binary exponent is split off first, so
/// multiplying `x` by `2^{jd}` multiplies the result by exactly `2^{-j}`.
pub fn inv_root(x: f64, d: usize) -> f64 {
    let (m, e) = frexp(x);
    let d_i = d as i32;
    let (q, r) = (e.div_euclid(d_i), e.rem_euclid(d_i));
    ldexp(pow(ldexp(m, r), -1.0 / d as f64), -q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_root_is_exact_under_power_of_two_scaling() {
        for &x in &[0.37, 1.0, 5.5, 1e-9, 3e12] {
            for d in 2..6 {
                let r = inv_root(x, d);
                assert!((r - pow(x, -1.0 / d as f64)).abs() <= 1e-15 * r);
                assert_eq!(inv_root(x * pow(4.0, d as f64), d), r / 4.0);
            }
        }
    }
}
