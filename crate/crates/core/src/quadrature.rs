//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and half-infinite
//! intervals.

use crate::math;
use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 48;

/// Kronrod estimate and `|Kronrod − Gauss|` on `[a, b]`.
pub fn gauss_kronrod_15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, math::abs((kronrod - gauss) * h))
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<(f64, f64)> {
    let (val, err) = gauss_kronrod_15(f, a, b);
    let floor = 64.0 * f64::EPSILON * math::abs(val);
    if err <= tol.max(floor) {
        return Ok((val, err));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature { error: err });
    }
    let m = 0.5 * (a + b);
    let (l, el) = adapt(f, a, m, 0.5 * tol, depth + 1)?;
    let (r, er) = adapt(f, m, b, 0.5 * tol, depth + 1)?;
    Ok((l + r, el + er))
}

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    adapt(&f, a, b, tol, 0).map(|(v, _)| v)
}

/// `∫_a^∞ f` for integrands that decay past their bulk. Integrates over
/// `[a, a+1]`, then intervals of doubling width, until a piece contributes
/// less than `tail_tol` relative to the running total.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: f64, tail_tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = a;
    let mut width = 1.0;
    let mut small_pieces = 0;
    for piece in 0..64 {
        let hi = lo + width;
        let v = adapt(&f, lo, hi, tol, 0)?.0;
        total += v;
        if piece >= 2 && math::abs(v) <= tail_tol * math::abs(total).max(f64::MIN_POSITIVE) {
            small_pieces += 1;
            if small_pieces == 2 {
                return Ok(total);
            }
        } else {
            small_pieces = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::Quadrature { error: f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let sk: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let sg: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((sk - 2.0).abs() < 1e-15);
        assert!((sg - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        // Kronrod 15 is exact through degree 22, Gauss 7 through degree 13.
        for deg in 0..=22 {
            let (v, _) = gauss_kronrod_15(&|x: f64| x.powi(deg), 0.0, 1.0);
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-15, "deg {deg}");
        }
        let (_, err) = gauss_kronrod_15(&|x: f64| x.powi(13), 0.0, 1.0);
        assert!(err < 1e-15);
    }

    #[test]
    fn adaptive_on_smooth_and_peaked() {
        let v = integrate(|x: f64| x.sin(), 0.0, core::f64::consts::PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn half_line() {
        let v = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1e-14, 1e-15).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        let v = integrate_to_infinity(|x: f64| 1.0 / x.cosh().powi(2), 0.0, 1e-14, 1e-15).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }
}
