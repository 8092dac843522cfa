//! Verification experiments and their reports.
//!
//! Every experiment is a pure function of its spec and seed: random streams
//! are addressed by `(seed, stream)` with the stream id derived from the
//! purpose of the draw, parallel work is collected in a fixed order, and
//! reports contain no wall-clock data unless the caller adds it.

use std::fmt::Write as _;

use pwishart_core::densities::{projective_logdensity_trace, trace_functional};
use pwishart_core::frechet::karcher_mean;
use pwishart_core::manifold::{distance, project};
use pwishart_core::sampling::{conjugate_stabilizer, random_unit_det_point, sample_stabilizer};
use pwishart_core::stats::{
    binned_ratio_test, equal_mass_edges, ks_one_sample, ks_two_sample, WeightedHistogram,
};
use pwishart_core::{
    Complex64, Field, GroupElement, Mat, MeanConfig, RadialLaw, RngStream, Scalar, SpdPoint,
    UnitDetPoint, WishartParams, WishartSampler, DEFAULT_SCALE,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{
    Control, DensitySpec, Expect, ExperimentSpec, FrechetSpec, InvarianceSpec, RadialKsSpec,
    SuiteSpec,
};
use crate::format::MatrixRecord;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("experiment `{id}`: {source}")]
    Core {
        id: String,
        source: pwishart_core::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within([f64; 2]),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(b) => v <= b,
            Bound::AtLeast(b) => v >= b,
            Bound::Within([lo, hi]) => v >= lo && v <= hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub ok: bool,
}

impl Check {
    fn new(name: &str, value: f64, bound: Bound) -> Self {
        Self {
            name: name.into(),
            ok: bound.holds(value),
            value,
            bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub kind: String,
    pub seed: u64,
    pub expect: Expect,
    /// `accepted` iff every check holds.
    pub outcome: Outcome,
    /// Whether the outcome matches `expect`.
    pub passed: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub side_files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tool_version: String,
    pub seed: u64,
    pub passed: bool,
    pub experiments: Vec<ExperimentReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_unix: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_unix: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SideFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub side_files: Vec<SideFile>,
}

const SIGMA: u64 = 1;
const SAMPLES: u64 = 2;
const ROTATIONS: u64 = 3;
const REFERENCE: u64 = 4;
const SHUFFLE: u64 = 5;
const PROBES: u64 = 6;

fn stream(purpose: u64, major: usize, minor: usize) -> u64 {
    (purpose << 48) | ((major as u64) << 24) | minor as u64
}

type Res<T> = pwishart_core::Result<T>;

struct Body {
    checks: Vec<Check>,
    details: serde_json::Value,
    csv: Option<String>,
}

/// Runs one experiment. `default_seed` applies when the experiment sets no seed.
pub fn run_experiment(spec: &ExperimentSpec, default_seed: u64) -> Result<ExperimentRun, VerifyError> {
    let seed = spec.seed().unwrap_or(default_seed);
    let body = match spec {
        ExperimentSpec::Frechet(s) => by_field(s.field.into(), || frechet::<f64>(s, seed), || frechet::<Complex64>(s, seed)),
        ExperimentSpec::RadialKs(s) => by_field(s.field.into(), || radial::<f64>(s, seed), || radial::<Complex64>(s, seed)),
        ExperimentSpec::Invariance(s) => {
            by_field(s.field.into(), || invariance::<f64>(s, seed), || invariance::<Complex64>(s, seed))
        }
        ExperimentSpec::DensityConsistency(s) => {
            by_field(s.field.into(), || density::<f64>(s, seed), || density::<Complex64>(s, seed))
        }
    }
    .map_err(|source| VerifyError::Core {
        id: spec.id().to_string(),
        source,
    })?;

    let outcome = if body.checks.iter().all(|c| c.ok) {
        Outcome::Accepted
    } else {
        Outcome::Rejected
    };
    let passed = matches!(
        (spec.expect(), outcome),
        (Expect::Pass, Outcome::Accepted) | (Expect::Reject, Outcome::Rejected)
    );
    let side_files: Vec<SideFile> = body
        .csv
        .into_iter()
        .map(|contents| SideFile {
            name: format!("{}.csv", spec.id()),
            contents,
        })
        .collect();
    Ok(ExperimentRun {
        report: ExperimentReport {
            id: spec.id().to_string(),
            kind: spec.kind().to_string(),
            seed,
            expect: spec.expect(),
            outcome,
            passed,
            checks: body.checks,
            details: body.details,
            side_files: side_files.iter().map(|f| f.name.clone()).collect(),
            elapsed_seconds: None,
        },
        side_files,
    })
}

/// Runs every experiment in order, collecting reports and side files.
pub fn run_suite(spec: &SuiteSpec) -> Result<(SuiteReport, Vec<SideFile>), VerifyError> {
    let runs: Vec<ExperimentRun> = spec
        .experiments
        .iter()
        .map(|e| run_experiment(e, spec.seed))
        .collect::<Result<_, _>>()?;
    let mut files = Vec::new();
    let mut reports = Vec::new();
    for r in runs {
        files.extend(r.side_files);
        reports.push(r.report);
    }
    Ok((
        SuiteReport {
            tool_version: TOOL_VERSION.to_string(),
            seed: spec.seed,
            passed: reports.iter().all(|r| r.passed),
            experiments: reports,
            started_unix: None,
            finished_unix: None,
        },
        files,
    ))
}

/// One line per experiment: `PASS|FAIL id kind outcome check=value ...`.
pub fn summarize(report: &SuiteReport) -> String {
    let mut out = String::new();
    for e in &report.experiments {
        let _ = write!(
            out,
            "{} {} ({}, expect {}, {})",
            if e.passed { "PASS" } else { "FAIL" },
            e.id,
            e.kind,
            match e.expect {
                Expect::Pass => "pass",
                Expect::Reject => "reject",
            },
            match e.outcome {
                Outcome::Accepted => "accepted",
                Outcome::Rejected => "rejected",
            }
        );
        for c in &e.checks {
            let _ = write!(out, " {}={:.4e}{}", c.name, c.value, if c.ok { "" } else { "!" });
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "{} {}/{} experiments passed",
        if report.passed { "PASS" } else { "FAIL" },
        report.experiments.iter().filter(|e| e.passed).count(),
        report.experiments.len()
    );
    out
}

fn by_field(
    field: Field,
    real: impl FnOnce() -> Res<Body>,
    complex: impl FnOnce() -> Res<Body>,
) -> Res<Body> {
    match field {
        Field::Real => real(),
        Field::Complex => complex(),
    }
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

fn sampler_for<S: Scalar>(sigma: &SpdPoint<S>, n: usize) -> Res<WishartSampler<S>> {
    WishartSampler::new(WishartParams::new(sigma.clone(), n)?)
}

struct FrechetJob {
    sigma: usize,
    replicate: usize,
    full: (f64, usize, bool),
    quarters: Vec<(f64, usize, bool)>,
}

fn frechet<S: Scalar>(s: &FrechetSpec, seed: u64) -> Res<Body> {
    let sigmas: Vec<SpdPoint<S>> = s
        .sigmas
        .iter()
        .enumerate()
        .map(|(i, sg)| sg.resolve(s.d, &mut RngStream::new(seed, stream(SIGMA, i, 0))))
        .collect::<Res<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..sigmas.len())
        .flat_map(|i| (0..s.replicates).map(move |r| (i, r)))
        .collect();
    let cfg = MeanConfig::default();
    let results: Vec<FrechetJob> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let sampler = sampler_for(&sigmas[i], s.n)?;
            let bar = sampler.params().sigma_bar();
            let mut rng = RngStream::new(seed, stream(SAMPLES, i, r));
            let points = sampler.sample_projective_batch(s.samples, &mut rng)?;
            let solve = |pts: &[UnitDetPoint<S>]| -> Res<(f64, usize, bool)> {
                let m = karcher_mean(pts, None, &cfg)?;
                Ok((distance(&m.mean, &bar, DEFAULT_SCALE)?, m.iterations, m.converged))
            };
            Ok(FrechetJob {
                sigma: i,
                replicate: r,
                full: solve(&points)?,
                quarters: points.chunks(s.samples / 4).map(solve).collect::<Res<_>>()?,
            })
        })
        .collect::<Res<_>>()?;

    let full: Vec<f64> = results.iter().map(|j| j.full.0).collect();
    let quarter: Vec<f64> = results.iter().flat_map(|j| j.quarters.iter().map(|q| q.0)).collect();
    let unconverged = results
        .iter()
        .flat_map(|j| std::iter::once(&j.full).chain(&j.quarters))
        .filter(|q| !q.2)
        .count();
    let max_full = full.iter().cloned().fold(0.0, f64::max);
    let ratio = rms(&full) / rms(&quarter);

    let mut csv = String::from("sigma,replicate,samples,part,distance,iterations,converged\n");
    for j in &results {
        let _ = writeln!(csv, "{},{},{},full,{},{},{}", j.sigma, j.replicate, s.samples, j.full.0, j.full.1, j.full.2);
        for (q, part) in j.quarters.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{},{},{},quarter{},{},{},{}",
                j.sigma,
                j.replicate,
                s.samples / 4,
                q,
                part.0,
                part.1,
                part.2
            );
        }
    }
    let per_sigma: Vec<serde_json::Value> = sigmas
        .iter()
        .enumerate()
        .map(|(i, sg)| {
            let d: Vec<f64> = results.iter().filter(|j| j.sigma == i).map(|j| j.full.0).collect();
            json!({
                "sigma": MatrixRecord::from_mat(sg.mat().mat(), None),
                "distances": d,
            })
        })
        .collect();
    Ok(Body {
        checks: vec![
            Check::new("max_distance", max_full, Bound::AtMost(s.tolerance)),
            Check::new("distance_ratio", ratio, Bound::Within(s.ratio_range)),
            Check::new("unconverged_solves", unconverged as f64, Bound::AtMost(0.0)),
        ],
        details: json!({
            "d": s.d,
            "field": s.field,
            "n": s.n,
            "samples": s.samples,
            "replicates": s.replicates,
            "rms_distance_full": rms(&full),
            "rms_distance_quarter": rms(&quarter),
            "max_iterations": results.iter().flat_map(|j| std::iter::once(j.full.1).chain(j.quarters.iter().map(|q| q.1))).max(),
            "per_sigma": per_sigma,
        }),
        csv: Some(csv),
    })
}

fn radial<S: Scalar>(s: &RadialKsSpec, seed: u64) -> Res<Body> {
    let sigma: SpdPoint<S> = s.sigma.resolve(2, &mut RngStream::new(seed, stream(SIGMA, 0, 0)))?;
    let sampler = sampler_for(&sigma, s.n)?;
    let center = match &s.center {
        Some(c) => project(&c.resolve::<S>(2, &mut RngStream::new(seed, stream(SIGMA, 1, 0)))?),
        None => sampler.params().sigma_bar(),
    };
    let points = sampler.sample_projective_batch(s.samples, &mut RngStream::new(seed, stream(SAMPLES, 0, 0)))?;
    let r: Vec<f64> = points
        .par_iter()
        .map(|x| distance(x, &center, DEFAULT_SCALE))
        .collect::<Res<_>>()?;
    let law_n = s.law_n.unwrap_or(s.n);
    let law = RadialLaw::new(S::FIELD, law_n)?;
    let ks = ks_one_sample(&r, |v| law.cdf(v))?;

    let mut sorted = r.clone();
    sorted.sort_by(f64::total_cmp);
    let emp_median = sorted[sorted.len() / 2];
    let top = law.quantile(0.999).max(*sorted.last().unwrap_or(&0.0));
    let bins = 40;
    let width = top / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &r {
        counts[((v / width) as usize).min(bins - 1)] += 1;
    }
    let mut csv = String::from("lower,upper,empirical_density,law_density,law_mass\n");
    for (b, &c) in counts.iter().enumerate() {
        let (lo, hi) = (b as f64 * width, (b + 1) as f64 * width);
        let _ = writeln!(
            csv,
            "{lo},{hi},{},{},{}",
            c as f64 / (r.len() as f64 * width),
            law.pdf(0.5 * (lo + hi)),
            law.cdf(hi) - law.cdf(lo)
        );
    }
    Ok(Body {
        checks: vec![Check::new("ks_p_value", ks.p_value, Bound::AtLeast(s.alpha))],
        details: json!({
            "field": s.field,
            "n": s.n,
            "law_n": law_n,
            "samples": s.samples,
            "ks_statistic": ks.statistic,
            "ks_p_value": ks.p_value,
            "empirical_median": emp_median,
            "law_median": law.median(),
            "law_mode": law.mode(),
        }),
        csv: Some(csv),
    })
}

fn invariance<S: Scalar>(s: &InvarianceSpec, seed: u64) -> Res<Body> {
    let sigma: SpdPoint<S> = s.sigma.resolve(s.d, &mut RngStream::new(seed, stream(SIGMA, 0, 0)))?;
    let sampler = sampler_for(&sigma, s.n)?;
    let bar = sampler.params().sigma_bar();
    let stabilizer = |k: usize| -> Res<GroupElement<S>> {
        let r = sample_stabilizer::<S>(s.d, &mut RngStream::new(seed, stream(ROTATIONS, k, 0)))?;
        conjugate_stabilizer(&r, &sigma)
    };
    let rotations: Vec<GroupElement<S>> = (0..s.rotations).map(stabilizer).collect::<Res<_>>()?;

    let a = sampler.sample_projective_batch(s.samples, &mut RngStream::new(seed, stream(SAMPLES, 0, 0)))?;
    let moved: Vec<UnitDetPoint<S>> = a
        .par_iter()
        .enumerate()
        .map(|(i, x)| rotations[i % rotations.len()].act(x))
        .collect::<Res<_>>()?;

    let d_before: Vec<f64> = a.par_iter().map(|x| distance(x, &bar, DEFAULT_SCALE)).collect::<Res<_>>()?;
    let d_after: Vec<f64> = moved.par_iter().map(|x| distance(x, &bar, DEFAULT_SCALE)).collect::<Res<_>>()?;
    let max_radial_change = d_before
        .iter()
        .zip(&d_after)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    let pairs = (a.len() - 1).min(1000);
    let mut max_pair_change = 0.0f64;
    for i in 0..pairs {
        let g = &rotations[i % rotations.len()];
        let before = distance(&a[i], &a[i + 1], DEFAULT_SCALE)?;
        let after = distance(&g.act(&a[i])?, &g.act(&a[i + 1])?, DEFAULT_SCALE)?;
        max_pair_change = max_pair_change.max((before - after).abs());
    }

    let top = d_before.iter().chain(&d_after).cloned().fold(0.0, f64::max) * (1.0 + 1e-12);
    let bins = 30;
    let hist = |v: &[f64]| {
        let mut h = vec![0usize; bins];
        for &x in v {
            h[((x / top * bins as f64) as usize).min(bins - 1)] += 1;
        }
        h
    };
    let (h_before, h_after) = (hist(&d_before), hist(&d_after));
    let mismatched = h_before.iter().zip(&h_after).filter(|(u, v)| u != v).count();

    let mut fixed_dev = 0.0f64;
    for g in &rotations {
        fixed_dev = fixed_dev.max(distance(&g.act(&bar)?, &bar, DEFAULT_SCALE)?);
    }

    // Points away from Σ̄ must be moved by some stabilizer element.
    let mut min_displacement = f64::INFINITY;
    for p in 0..100 {
        let mut rng = RngStream::new(seed, stream(PROBES, p, 0));
        let y = bar_translate(&sigma, &random_unit_det_point::<S>(s.d, &mut rng)?)?;
        let off = distance(&y, &bar, DEFAULT_SCALE)?;
        let mut best = 0.0f64;
        for g in &rotations {
            best = best.max(distance(&g.act(&y)?, &y, DEFAULT_SCALE)?);
        }
        min_displacement = min_displacement.min(best / off);
    }

    let b = sampler.sample_projective_batch(s.samples, &mut RngStream::new(seed, stream(SAMPLES, 1, 0)))?;
    let shear = shear_element::<S>(s.d)?;
    let b_moved: Vec<UnitDetPoint<S>> = b
        .iter()
        .map(|x| {
            if s.perturb {
                shear.act(x)
            } else {
                rotations[0].act(x)
            }
        })
        .collect::<Res<_>>()?;
    let first = |v: &[UnitDetPoint<S>]| -> Vec<f64> { v.iter().map(|x| x.mat().mat()[(0, 0)].re()).collect() };
    let ks = ks_two_sample(&first(&a), &first(&b_moved))?;

    Ok(Body {
        checks: vec![
            Check::new("max_radial_change", max_radial_change, Bound::AtMost(s.tolerance)),
            Check::new("max_pair_distance_change", max_pair_change, Bound::AtMost(s.tolerance)),
            Check::new("histogram_mismatched_bins", mismatched as f64, Bound::AtMost(0.0)),
            Check::new("fixed_point_deviation", fixed_dev, Bound::AtMost(s.tolerance)),
            Check::new("min_relative_displacement", min_displacement, Bound::AtLeast(0.1)),
            Check::new("ks_p_value", ks.p_value, Bound::AtLeast(s.alpha)),
        ],
        details: json!({
            "d": s.d,
            "field": s.field,
            "n": s.n,
            "samples": s.samples,
            "rotations": s.rotations,
            "perturb": s.perturb,
            "ks_statistic": ks.statistic,
            "ks_p_value": ks.p_value,
            "radial_histogram": h_before,
        }),
        csv: None,
    })
}

/// `Σ^{1/2} y Σ^{1/2}`, normalized; spreads probe points around Σ̄.
fn bar_translate<S: Scalar>(sigma: &SpdPoint<S>, y: &UnitDetPoint<S>) -> Res<UnitDetPoint<S>> {
    let l = sigma.mat().cholesky()?;
    let g = GroupElement::normalized(l)?;
    g.act(y)
}

/// `diag(3/2, 2/3, 1, …)`: unit determinant but not a stabilizer of Σ̄ in general.
fn shear_element<S: Scalar>(d: usize) -> Res<GroupElement<S>> {
    let mut diag = vec![1.0; d];
    diag[0] = 1.5;
    diag[1] = 1.0 / 1.5;
    GroupElement::new(Mat::from_diag(&diag.iter().map(|&v| S::from_real(v)).collect::<Vec<_>>()))
}

fn density<S: Scalar>(s: &DensitySpec, seed: u64) -> Res<Body> {
    let sigma: SpdPoint<S> = s.sigma.resolve(s.d, &mut RngStream::new(seed, stream(SIGMA, 0, 0)))?;
    let n_ref = s.reference_n.unwrap_or(s.n - 1);
    let target = sampler_for(&sigma, s.n)?;
    let reference = sampler_for(&sigma, n_ref)?;
    let observed = target.sample_projective_batch(s.samples, &mut RngStream::new(seed, stream(SAMPLES, 0, 0)))?;
    let proposal =
        reference.sample_projective_batch(s.samples, &mut RngStream::new(seed, stream(REFERENCE, 0, 0)))?;

    let t_obs: Vec<f64> = observed
        .par_iter()
        .map(|x| trace_functional(x.mat(), &sigma))
        .collect::<Res<_>>()?;
    let t_prop: Vec<f64> = proposal
        .par_iter()
        .map(|x| trace_functional(x.mat(), &sigma))
        .collect::<Res<_>>()?;
    let log_w: Vec<f64> = proposal
        .par_iter()
        .map(|x| {
            Ok(projective_logdensity_trace(x, target.params())?.log_value
                - projective_logdensity_trace(x, reference.params())?.log_value)
        })
        .collect::<Res<_>>()?;
    let shift = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - shift).exp()).collect();
    let ess = w.iter().sum::<f64>().powi(2) / w.iter().map(|v| v * v).sum::<f64>();

    let edges = equal_mass_edges(&t_prop, s.bins)?;
    let obs = WeightedHistogram::new(&edges, &t_obs, None)?;
    let mut pred = WeightedHistogram::new(&edges, &t_prop, Some(&w))?;
    if s.control == Some(Control::Shuffle) {
        let mut perm: Vec<usize> = (0..pred.bins()).collect();
        let mut rng = RngStream::new(seed, stream(SHUFFLE, 0, 0));
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.below(i as u64 + 1) as usize);
        }
        pred = pred.permuted(&perm);
    }
    let test = binned_ratio_test(&obs, &pred, s.min_count, s.z_max)?;

    let (om, pm) = (obs.masses(), pred.masses());
    let mut csv = String::from("bin,lower,upper,observed_mass,predicted_mass,observed_count,predicted_count\n");
    for i in 0..obs.bins() {
        let lo = if i == 0 { f64::NEG_INFINITY } else { edges[i - 1] };
        let hi = edges.get(i).copied().unwrap_or(f64::INFINITY);
        let _ = writeln!(csv, "{i},{lo},{hi},{},{},{},{}", om[i], pm[i], obs.count[i], pred.count[i]);
    }
    let pairs: Vec<serde_json::Value> = test
        .pairs
        .iter()
        .map(|p| json!({"lo": p.lo, "hi": p.hi, "z": p.z}))
        .collect();
    Ok(Body {
        checks: vec![Check::new("max_abs_z", test.max_abs_z, Bound::AtMost(s.z_max))],
        details: json!({
            "d": s.d,
            "field": s.field,
            "n": s.n,
            "reference_n": n_ref,
            "samples": s.samples,
            "bins": s.bins,
            "control": s.control,
            "effective_sample_size": ess,
            "excluded_bins": test.excluded_bins,
            "pairs": pairs,
        }),
        csv: Some(csv),
    })
}
