//! Experiment suite configuration.

use std::collections::BTreeSet;

use pwishart_core::sampling::random_spd;
use pwishart_core::{Field, RngStream, Scalar, SpdPoint};
use serde::{Deserialize, Serialize};

use crate::format::{parse_matrix_literal, FieldTag, MatrixRecord};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid experiment spec: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("experiment `{id}`: {message}")]
    Invalid { id: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub version: u32,
    /// Default seed for experiments that do not set their own.
    pub seed: u64,
    pub experiments: Vec<ExperimentSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Pass,
    Reject,
}

/// `"identity"`, `"random"`, a matrix record, or real rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Named(String),
    Record(MatrixRecord),
    Rows(Vec<Vec<f64>>),
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::Named("identity".into())
    }
}

impl SigmaSpec {
    fn random() -> Self {
        SigmaSpec::Named("random".into())
    }

    fn check(&self, d: usize, field: Field) -> Result<(), String> {
        match self {
            SigmaSpec::Named(n) if n == "identity" || n == "random" => Ok(()),
            SigmaSpec::Named(n) => Err(format!("unknown sigma `{n}`")),
            _ => {
                let rec = self.to_record(d, field)?;
                let ok = match field {
                    Field::Real => rec.to_spd::<f64>().map(|_| ()),
                    Field::Complex => rec.to_spd::<pwishart_core::Complex64>().map(|_| ()),
                };
                ok.map_err(|e| format!("sigma: {e}"))?;
                if rec.dim != d {
                    return Err(format!("sigma has dim {}, expected {d}", rec.dim));
                }
                Ok(())
            }
        }
    }

    fn to_record(&self, d: usize, field: Field) -> Result<MatrixRecord, String> {
        match self {
            SigmaSpec::Record(r) => Ok(r.clone()),
            SigmaSpec::Rows(rows) => {
                let text = serde_json::to_string(rows).map_err(|e| e.to_string())?;
                parse_matrix_literal(&text, Some(d), field).map_err(|e| e.to_string())
            }
            SigmaSpec::Named(n) => parse_matrix_literal(n, Some(d), field).map_err(|e| e.to_string()),
        }
    }

    /// Materializes Σ; `"random"` draws from `rng`.
    pub fn resolve<S: Scalar>(&self, d: usize, rng: &mut RngStream) -> pwishart_core::Result<SpdPoint<S>> {
        match self {
            SigmaSpec::Named(n) if n == "random" => random_spd(d, rng),
            other => {
                let rec = other
                    .to_record(d, S::FIELD)
                    .map_err(|_| pwishart_core::Error::InvalidArgument("unparseable sigma"))?;
                rec.to_spd::<S>()
                    .map_err(|_| pwishart_core::Error::InvalidArgument("sigma is not positive definite"))
            }
        }
    }
}

fn default_random_sigmas() -> Vec<SigmaSpec> {
    vec![SigmaSpec::random(); 3]
}
fn default_replicates() -> usize {
    4
}
fn default_frechet_tol() -> f64 {
    0.02
}
fn default_ratio_range() -> [f64; 2] {
    [0.3, 0.8]
}
fn default_alpha() -> f64 {
    0.01
}
fn default_rotations() -> usize {
    100
}
fn default_exact_tol() -> f64 {
    1e-9
}
fn default_bins() -> usize {
    20
}
fn default_min_count() -> usize {
    50
}
fn default_z_max() -> f64 {
    3.0
}

/// Karcher mean of `samples` draws, and of each quarter of them, for every
/// Σ and replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrechetSpec {
    pub id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub expect: Expect,
    pub d: usize,
    pub field: FieldTag,
    pub n: usize,
    #[serde(default = "default_random_sigmas")]
    pub sigmas: Vec<SigmaSpec>,
    pub samples: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_frechet_tol")]
    pub tolerance: f64,
    #[serde(default = "default_ratio_range")]
    pub ratio_range: [f64; 2],
}

/// One-sample KS of `d(x_i, π(center))` against the radial law with
/// `law_n` degrees of freedom (2×2 only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialKsSpec {
    pub id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub expect: Expect,
    pub field: FieldTag,
    pub n: usize,
    #[serde(default)]
    pub sigma: SigmaSpec,
    /// Point the distances are measured from; defaults to Σ.
    #[serde(default)]
    pub center: Option<SigmaSpec>,
    #[serde(default)]
    pub law_n: Option<usize>,
    pub samples: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

/// Stabilizer invariance: exact isometry and fixed-point checks plus a
/// two-sample KS between a batch and an independently rotated batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceSpec {
    pub id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub expect: Expect,
    pub d: usize,
    pub field: FieldTag,
    pub n: usize,
    #[serde(default)]
    pub sigma: SigmaSpec,
    pub samples: usize,
    #[serde(default = "default_rotations")]
    pub rotations: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_exact_tol")]
    pub tolerance: f64,
    /// Rotate the second batch by a fixed non-stabilizing element instead.
    #[serde(default)]
    pub perturb: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    /// Shuffle the predicted bins before comparing.
    Shuffle,
}

/// Binned ratio test of the trace-form density in any dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub expect: Expect,
    pub d: usize,
    pub field: FieldTag,
    pub n: usize,
    /// Degrees of freedom of the reweighted reference batch; defaults to `n − 1`.
    #[serde(default)]
    pub reference_n: Option<usize>,
    #[serde(default)]
    pub sigma: SigmaSpec,
    pub samples: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_min_count")]
    pub min_count: usize,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default)]
    pub control: Option<Control>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    Frechet(FrechetSpec),
    RadialKs(RadialKsSpec),
    Invariance(InvarianceSpec),
    DensityConsistency(DensitySpec),
}

impl ExperimentSpec {
    pub fn id(&self) -> &str {
        match self {
            ExperimentSpec::Frechet(s) => &s.id,
            ExperimentSpec::RadialKs(s) => &s.id,
            ExperimentSpec::Invariance(s) => &s.id,
            ExperimentSpec::DensityConsistency(s) => &s.id,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::Frechet(_) => "frechet",
            ExperimentSpec::RadialKs(_) => "radial_ks",
            ExperimentSpec::Invariance(_) => "invariance",
            ExperimentSpec::DensityConsistency(_) => "density_consistency",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentSpec::Frechet(s) => s.seed,
            ExperimentSpec::RadialKs(s) => s.seed,
            ExperimentSpec::Invariance(s) => s.seed,
            ExperimentSpec::DensityConsistency(s) => s.seed,
        }
    }

    pub fn expect(&self) -> Expect {
        match self {
            ExperimentSpec::Frechet(s) => s.expect,
            ExperimentSpec::RadialKs(s) => s.expect,
            ExperimentSpec::Invariance(s) => s.expect,
            ExperimentSpec::DensityConsistency(s) => s.expect,
        }
    }

    fn validate(&self) -> Result<(), String> {
        fn dims(d: usize, n: usize) -> Result<(), String> {
            if d < 2 {
                return Err(format!("d must be at least 2, got {d}"));
            }
            if n < d {
                return Err(format!("n must be at least d = {d}, got {n}"));
            }
            Ok(())
        }
        fn alpha(a: f64) -> Result<(), String> {
            if !(a > 0.0 && a < 1.0) {
                return Err(format!("alpha must lie in (0, 1), got {a}"));
            }
            Ok(())
        }
        fn samples(s: usize, min: usize) -> Result<(), String> {
            if s < min {
                return Err(format!("samples must be at least {min}, got {s}"));
            }
            Ok(())
        }
        match self {
            ExperimentSpec::Frechet(s) => {
                dims(s.d, s.n)?;
                samples(s.samples, 400)?;
                if s.samples % 4 != 0 {
                    return Err("samples must be divisible by 4".into());
                }
                if s.sigmas.is_empty() || s.replicates == 0 {
                    return Err("need at least one sigma and one replicate".into());
                }
                if !(s.tolerance > 0.0) {
                    return Err("tolerance must be positive".into());
                }
                let [lo, hi] = s.ratio_range;
                if !(lo >= 0.0 && lo < hi) {
                    return Err("ratio_range must be an increasing pair".into());
                }
                for sig in &s.sigmas {
                    sig.check(s.d, s.field.into())?;
                }
            }
            ExperimentSpec::RadialKs(s) => {
                dims(2, s.n)?;
                samples(s.samples, 100)?;
                alpha(s.alpha)?;
                if s.law_n.is_some_and(|m| m < 2) {
                    return Err("law_n must be at least 2".into());
                }
                s.sigma.check(2, s.field.into())?;
                if let Some(c) = &s.center {
                    c.check(2, s.field.into())?;
                }
            }
            ExperimentSpec::Invariance(s) => {
                dims(s.d, s.n)?;
                samples(s.samples, 100)?;
                alpha(s.alpha)?;
                if s.rotations == 0 || !(s.tolerance > 0.0) {
                    return Err("rotations and tolerance must be positive".into());
                }
                s.sigma.check(s.d, s.field.into())?;
            }
            ExperimentSpec::DensityConsistency(s) => {
                dims(s.d, s.n)?;
                samples(s.samples, 1000)?;
                let r = s.reference_n.unwrap_or(s.n.saturating_sub(1));
                if r < s.d {
                    return Err(format!("reference_n must be at least d = {}, got {r}", s.d));
                }
                if s.bins < 3 || s.min_count == 0 || !(s.z_max > 0.0) {
                    return Err("need bins >= 3, min_count >= 1 and z_max > 0".into());
                }
                s.sigma.check(s.d, s.field.into())?;
            }
        }
        Ok(())
    }
}

impl SuiteSpec {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let spec: SuiteSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let suite = |message: String| ConfigError::Invalid {
            id: "<suite>".into(),
            message,
        };
        if self.version != 1 {
            return Err(suite(format!("unsupported version {}", self.version)));
        }
        let mut seen = BTreeSet::new();
        for e in &self.experiments {
            if !seen.insert(e.id()) {
                return Err(suite(format!("duplicate experiment id `{}`", e.id())));
            }
            e.validate().map_err(|message| ConfigError::Invalid {
                id: e.id().to_string(),
                message,
            })?;
        }
        Ok(())
    }
}
