//! Goodness-of-fit tools: one- and two-sample Kolmogorov–Smirnov tests and a
//! binned log-ratio test between weighted histograms.

use alloc::vec::Vec;

use crate::math::{self, PI};
use crate::{Error, Result};

const KS_TERMS: usize = 100;

/// `P(K > λ)` for the Kolmogorov distribution.
///
/// Uses the alternating series `2 Σ (−1)^{j−1} e^{−2j²λ²}` for `λ ≥ 1.18`
/// and the Jacobi-theta form `1 − (√(2π)/λ) Σ e^{−(2j−1)²π²/(8λ²)}` below,
/// where the alternating series converges slowly.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = -PI * PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for j in 1..=KS_TERMS {
            let m = (2 * j - 1) as f64;
            let term = math::exp(y * m * m);
            s += term;
            if term < 1e-300 {
                break;
            }
        }
        (1.0 - math::sqrt(2.0 * PI) / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for j in 1..=KS_TERMS {
            let jf = j as f64;
            let term = math::exp(-2.0 * jf * jf * lambda * lambda);
            s += if j % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Supremum distance between the distribution functions.
    pub statistic: f64,
    /// Asymptotic p-value.
    pub p_value: f64,
    /// Effective sample size `n` (one-sample) or `nm/(n+m)` (two-sample).
    pub effective_n: f64,
}

impl KsResult {
    fn new(statistic: f64, effective_n: f64) -> Self {
        let sn = math::sqrt(effective_n);
        let lambda = (sn + 0.12 + 0.11 / sn) * statistic;
        Self {
            statistic,
            p_value: kolmogorov_sf(lambda),
            effective_n,
        }
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample test against a continuous distribution function.
pub fn ks_one_sample(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let v = sorted(values)?;
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max(hi - f).max(f - lo);
    }
    Ok(KsResult::new(d, n))
}

/// Two-sample test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max(math::abs(i as f64 / n - j as f64 / m));
    }
    Ok(KsResult::new(d, n * m / (n + m)))
}

/// Interior edges of `bins` equal-mass bins of `values` (empirical quantiles).
pub fn equal_mass_edges(values: &[f64], bins: usize) -> Result<Vec<f64>> {
    if bins < 2 {
        return Err(Error::InvalidArgument("need at least two bins"));
    }
    let v = sorted(values)?;
    Ok((1..bins)
        .map(|b| {
            let pos = b * v.len() / bins;
            v[pos.min(v.len() - 1)]
        })
        .collect())
}

/// Bin index of `x` for the interior `edges` (bin `i` is `[edge_{i-1}, edge_i)`).
pub fn bin_index(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|&e| e <= x)
}

/// Per-bin sums of weights, squared weights and raw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedHistogram {
    pub sum_w: Vec<f64>,
    pub sum_w2: Vec<f64>,
    pub count: Vec<usize>,
}

impl WeightedHistogram {
    pub fn new(edges: &[f64], values: &[f64], weights: Option<&[f64]>) -> Result<Self> {
        if let Some(w) = weights {
            if w.len() != values.len() {
                return Err(Error::InvalidWeights("length differs from the number of values"));
            }
        }
        let bins = edges.len() + 1;
        let mut h = Self {
            sum_w: alloc::vec![0.0; bins],
            sum_w2: alloc::vec![0.0; bins],
            count: alloc::vec![0; bins],
        };
        for (i, &x) in values.iter().enumerate() {
            let w = weights.map_or(1.0, |w| w[i]);
            let b = bin_index(edges, x);
            h.sum_w[b] += w;
            h.sum_w2[b] += w * w;
            h.count[b] += 1;
        }
        Ok(h)
    }

    pub fn bins(&self) -> usize {
        self.sum_w.len()
    }

    /// Bin masses normalized to sum 1.
    pub fn masses(&self) -> Vec<f64> {
        let total: f64 = self.sum_w.iter().sum();
        self.sum_w.iter().map(|w| w / total).collect()
    }

    /// Reorders bins: bin `i` of the result is bin `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            sum_w: perm.iter().map(|&p| self.sum_w[p]).collect(),
            sum_w2: perm.iter().map(|&p| self.sum_w2[p]).collect(),
            count: perm.iter().map(|&p| self.count[p]).collect(),
        }
    }

    /// Delta-method variance of `ln W_i`, up to the shared normalizer term
    /// that cancels in bin ratios.
    fn log_var(&self, i: usize) -> f64 {
        self.sum_w2[i] / (self.sum_w[i] * self.sum_w[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairZ {
    pub lo: usize,
    pub hi: usize,
    /// Observed minus predicted log-ratio, in standard errors.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioTestResult {
    pub pairs: Vec<PairZ>,
    /// Bins skipped for having fewer than `min_count` entries in either histogram.
    pub excluded_bins: Vec<usize>,
    pub max_abs_z: f64,
    pub passed: bool,
}

/// Compares `ln(W_i / W_j)` between an observed and a predicted histogram for
/// consecutive populated bins. Normalizers cancel in each ratio. Each pair's
/// standard error combines `Σw²/W²` of both bins in both histograms (the
/// multinomial covariance makes the pair variance exactly this sum). Passes
/// iff every `|z| <= z_max`.
pub fn binned_ratio_test(
    observed: &WeightedHistogram,
    predicted: &WeightedHistogram,
    min_count: usize,
    z_max: f64,
) -> Result<RatioTestResult> {
    if observed.bins() != predicted.bins() {
        return Err(Error::DimensionMismatch {
            expected: observed.bins(),
            found: predicted.bins(),
        });
    }
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for i in 0..observed.bins() {
        if observed.count[i] >= min_count && predicted.count[i] >= min_count && predicted.sum_w[i] > 0.0 {
            kept.push(i);
        } else {
            excluded.push(i);
        }
    }
    if kept.len() < 2 {
        return Err(Error::InvalidArgument("fewer than two populated bins"));
    }
    let mut pairs = Vec::with_capacity(kept.len() - 1);
    let mut max_abs_z = 0.0f64;
    for w in kept.windows(2) {
        let (i, j) = (w[0], w[1]);
        let obs = math::log(observed.sum_w[i] / observed.sum_w[j]);
        let pred = math::log(predicted.sum_w[i] / predicted.sum_w[j]);
        let var = observed.log_var(i) + observed.log_var(j) + predicted.log_var(i) + predicted.log_var(j);
        let z = (obs - pred) / math::sqrt(var);
        max_abs_z = max_abs_z.max(math::abs(z));
        pairs.push(PairZ { lo: i, hi: j, z });
    }
    Ok(RatioTestResult {
        pairs,
        excluded_bins: excluded,
        passed: max_abs_z <= z_max,
        max_abs_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn kolmogorov_reference_values() {
        // P(K > λ) at familiar critical points.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 2e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_sf(1.2238) - 0.10).abs() < 3e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(0.2) > 0.999_99);
        // both branches agree at the switch
        let a = kolmogorov_sf(1.18 - 1e-12);
        let b = kolmogorov_sf(1.18);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn uniform_sample_passes_and_shift_rejects() {
        let mut rng = RngStream::new(10, 0);
        let xs: Vec<f64> = (0..5000).map(|_| rng.uniform()).collect();
        let r = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(!r.rejects(0.01), "{r:?}");
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.9).collect();
        assert!(ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0)).unwrap().rejects(0.01));
    }

    #[test]
    fn one_sample_statistic_by_hand() {
        let r = ks_one_sample(&[0.5], |x| x).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-15);
        let r = ks_one_sample(&[0.1, 0.2, 0.9], |x| x).unwrap();
        // max(1/3-0.1, 2/3-0.2, 1-0.9, 0.1-0, 0.2-1/3, 0.9-2/3) = 0.4667
        assert!((r.statistic - (2.0 / 3.0 - 0.2)).abs() < 1e-15);
    }

    #[test]
    fn two_sample_statistic_by_hand() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[2.5, 3.5]).unwrap();
        // after 2.0: F_a = 2/3, F_b = 0
        assert!((r.statistic - 2.0 / 3.0).abs() < 1e-15);
        let r = ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn equal_mass_bins_split_evenly() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let e = equal_mass_edges(&xs, 4).unwrap();
        assert_eq!(e, alloc::vec![250.0, 500.0, 750.0]);
        let h = WeightedHistogram::new(&e, &xs, None).unwrap();
        assert_eq!(h.count, alloc::vec![250; 4]);
        assert_eq!(bin_index(&e, -1.0), 0);
        assert_eq!(bin_index(&e, 1e9), 3);
    }

    #[test]
    fn ratio_test_detects_mismatch() {
        let mut rng = RngStream::new(12, 0);
        let a: Vec<f64> = (0..20000).map(|_| rng.standard_normal()).collect();
        let b: Vec<f64> = (0..20000).map(|_| rng.standard_normal()).collect();
        let edges = equal_mass_edges(&a, 10).unwrap();
        let ha = WeightedHistogram::new(&edges, &a, None).unwrap();
        let hb = WeightedHistogram::new(&edges, &b, None).unwrap();
        let r = binned_ratio_test(&ha, &hb, 50, 3.0).unwrap();
        assert!(r.passed, "{r:?}");
        let c: Vec<f64> = (0..20000).map(|_| 1.2 * rng.standard_normal()).collect();
        let hc = WeightedHistogram::new(&edges, &c, None).unwrap();
        assert!(!binned_ratio_test(&ha, &hc, 50, 3.0).unwrap().passed);
    }
}
