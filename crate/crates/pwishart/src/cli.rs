//! The `pwishart` command line.
//!
//! Exit codes: 0 success, 1 statistical or convergence failure, 2 invalid
//! usage or input, 3 IO failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use pwishart_core::densities::{
    normalize_density_2d, projective_logdensity_cosh, projective_logdensity_trace,
};
use pwishart_core::frechet::karcher_mean;
use pwishart_core::manifold::{distance, project};
use pwishart_core::{
    Complex64, Field, MeanConfig, RadialLaw, RngStream, Scalar, UnitDetPoint,
    WishartParams, WishartSampler, DEFAULT_SCALE,
};
use serde::Serialize;

use crate::config::SuiteSpec;
use crate::format::{
    parse_matrix_literal, read_batch, records_to_unit_det, BatchHeader, FieldTag, FormatError,
    MatrixRecord, ParamsRecord, PointKind,
};
use crate::io::{open_input, read_to_string, write_atomic, write_output};
use crate::verify::{run_experiment, summarize, SuiteReport, TOOL_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io(e) => CliError::Io(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<pwishart_core::Error> for CliError {
    fn from(e: pwishart_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "pwishart", version, about = "Projective Wishart sampling, means, densities and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw Wishart or projective Wishart samples as JSON lines.
    Sample(SampleArgs),
    /// Project SPD matrices to determinant 1.
    Project(ProjectArgs),
    /// Affine-invariant distance between two matrices, or from each batch record to one.
    Distance(DistanceArgs),
    /// Karcher mean of a batch.
    Mean(MeanArgs),
    /// Radial law on a grid, or log-densities of a batch.
    Density(DensityArgs),
    /// Run an experiment suite and write a report.
    Verify(VerifyArgs),
    /// Summarize a report written by `verify`.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum)]
    pub field: FieldTag,
    /// Degrees of freedom.
    #[arg(long)]
    pub n: usize,
    /// `identity`, an inline JSON matrix, or a path to one.
    #[arg(long, default_value = "identity")]
    pub sigma: String,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// `unit-det` projects every draw; `spd` keeps the raw Wishart matrix.
    #[arg(long, value_enum, default_value = "unit-det")]
    pub output: PointKind,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    #[arg(default_value = "-")]
    pub input: String,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct DistanceArgs {
    #[arg(long, value_enum, default_value = "real")]
    pub field: FieldTag,
    /// First matrix; SPD inputs are projected first.
    #[arg(long, conflicts_with = "input")]
    pub x: Option<String>,
    /// Second matrix; defaults to the identity.
    #[arg(long, default_value = "identity")]
    pub y: String,
    /// Batch whose records are each measured against `--y`.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    pub scale: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct MeanArgs {
    #[arg(default_value = "-")]
    pub input: String,
    /// JSON array of weights summing to 1, inline or as a path.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    pub scale: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub field: FieldTag,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value = "identity")]
    pub sigma: String,
    /// `start:stop:step` radii for the radial law (2×2 only).
    #[arg(long, conflicts_with = "points")]
    pub grid: Option<String>,
    /// Batch of points to evaluate.
    #[arg(long)]
    pub points: Option<String>,
    /// Add the normalized 2×2 log-density.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    pub scale: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    pub config: String,
    #[arg(long, default_value = "verify-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub threads: usize,
    /// Record wall-clock times in the report. Off by default so that reports
    /// are byte-reproducible.
    #[arg(long)]
    pub timestamps: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    pub report: String,
}

/// Parses arguments and runs, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn echo<T: Serialize>(command: &str, args: &T) {
    let json = serde_json::to_string(args).unwrap_or_default();
    eprintln!("pwishart {TOOL_VERSION} {command} {json}");
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sample(a) => {
            echo("sample", &a);
            match a.field {
                FieldTag::Real => sample::<f64>(&a),
                FieldTag::Complex => sample::<Complex64>(&a),
            }
        }
        Command::Project(a) => {
            echo("project", &a);
            project_cmd(&a)
        }
        Command::Distance(a) => {
            echo("distance", &a);
            match a.field {
                FieldTag::Real => distance_cmd::<f64>(&a),
                FieldTag::Complex => distance_cmd::<Complex64>(&a),
            }
        }
        Command::Mean(a) => {
            echo("mean", &a);
            mean_cmd(&a)
        }
        Command::Density(a) => {
            echo("density", &a);
            match a.field {
                FieldTag::Real => density_cmd::<f64>(&a),
                FieldTag::Complex => density_cmd::<Complex64>(&a),
            }
        }
        Command::Verify(a) => {
            echo("verify", &a);
            verify_cmd(&a)
        }
        Command::Report(a) => report_cmd(&a),
    }
}

/// `identity`, inline JSON, or a path to a file holding either.
fn matrix_arg(text: &str, d: Option<usize>, field: Field) -> Result<MatrixRecord, CliError> {
    let t = text.trim();
    if t == "identity" || t.starts_with('{') || t.starts_with('[') {
        return Ok(parse_matrix_literal(t, d, field)?);
    }
    let contents = read_to_string(t)?;
    Ok(parse_matrix_literal(&contents, d, field)?)
}

fn sample<S: Scalar>(a: &SampleArgs) -> Result<(), CliError> {
    let sigma = matrix_arg(&a.sigma, Some(a.d), S::FIELD)?;
    if sigma.dim != a.d {
        return Err(CliError::Usage(format!("sigma has dim {}, but --d is {}", sigma.dim, a.d)));
    }
    let params = WishartParams::new(sigma.to_spd::<S>()?, a.n)?;
    let sampler = WishartSampler::new(params)?;
    let header = BatchHeader {
        params: ParamsRecord::from_params(sampler.params()),
        seed: a.seed,
        stream: a.stream,
        count: a.count,
        output: a.output,
    };
    let mut rng = RngStream::new(a.seed, a.stream);
    let mut out = serde_json::to_string(&header).map_err(FormatError::from)?;
    out.push('\n');
    for _ in 0..a.count {
        let x = sampler.sample(&mut rng)?;
        let rec = match a.output {
            PointKind::Spd => MatrixRecord::from_spd(&x),
            PointKind::UnitDet => MatrixRecord::from_unit_det(&project(&x)),
        };
        out.push_str(&serde_json::to_string(&rec).map_err(FormatError::from)?);
        out.push('\n');
    }
    Ok(write_output(a.out.as_deref(), out.as_bytes())?)
}

fn batch_field(header: &Option<BatchHeader>, records: &[MatrixRecord]) -> Result<Field, CliError> {
    let field = match (header, records.first()) {
        (Some(h), _) => h.params.field.into(),
        (None, Some(r)) => r.field(),
        (None, None) => return Err(CliError::Usage("input holds no matrices".into())),
    };
    if let Some(i) = records.iter().position(|r| r.field() != field) {
        return Err(CliError::Usage(format!("record {} is {}, expected {field}", i + 1, records[i].field())));
    }
    Ok(field)
}

fn first_record_line(header: &Option<BatchHeader>) -> usize {
    if header.is_some() {
        2
    } else {
        1
    }
}

fn project_cmd(a: &ProjectArgs) -> Result<(), CliError> {
    let (header, records) = read_batch(open_input(&a.input)?)?;
    let field = batch_field(&header, &records)?;
    let line0 = first_record_line(&header);
    let mut out = String::new();
    if let Some(mut h) = header {
        h.output = PointKind::UnitDet;
        out.push_str(&serde_json::to_string(&h).map_err(FormatError::from)?);
        out.push('\n');
    }
    let recs: Vec<MatrixRecord> = match field {
        Field::Real => records_to_unit_det::<f64>(&records, line0, true)?
            .iter()
            .map(MatrixRecord::from_unit_det)
            .collect(),
        Field::Complex => records_to_unit_det::<Complex64>(&records, line0, true)?
            .iter()
            .map(MatrixRecord::from_unit_det)
            .collect(),
    };
    for r in recs {
        out.push_str(&serde_json::to_string(&r).map_err(FormatError::from)?);
        out.push('\n');
    }
    Ok(write_output(a.out.as_deref(), out.as_bytes())?)
}

fn to_point<S: Scalar>(rec: &MatrixRecord) -> Result<UnitDetPoint<S>, CliError> {
    if rec.kind == Some(PointKind::UnitDet) {
        Ok(rec.to_unit_det()?)
    } else {
        Ok(project(&rec.to_spd::<S>()?))
    }
}

fn distance_cmd<S: Scalar>(a: &DistanceArgs) -> Result<(), CliError> {
    let mut out = String::new();
    match (&a.x, &a.input) {
        (Some(x), None) => {
            let x = to_point::<S>(&matrix_arg(x, None, S::FIELD)?)?;
            let y = to_point::<S>(&matrix_arg(&a.y, Some(x.dim()), S::FIELD)?)?;
            let _ = writeln!(out, "{}", distance(&x, &y, a.scale)?);
        }
        (None, Some(input)) => {
            let (header, records) = read_batch(open_input(input)?)?;
            if batch_field(&header, &records)? != S::FIELD {
                return Err(CliError::Usage(format!("batch field differs from --field {}", S::FIELD)));
            }
            let points = records_to_unit_det::<S>(&records, first_record_line(&header), true)?;
            let y = to_point::<S>(&matrix_arg(&a.y, Some(points[0].dim()), S::FIELD)?)?;
            for p in &points {
                let _ = writeln!(out, "{}", distance(p, &y, a.scale)?);
            }
        }
        _ => return Err(CliError::Usage("give exactly one of --x or --input".into())),
    }
    Ok(write_output(a.out.as_deref(), out.as_bytes())?)
}

#[derive(Serialize)]
struct MeanOutput {
    mean: MatrixRecord,
    iterations: usize,
    final_grad_norm: f64,
    converged: bool,
}

fn mean_cmd(a: &MeanArgs) -> Result<(), CliError> {
    let (header, records) = read_batch(open_input(&a.input)?)?;
    let field = batch_field(&header, &records)?;
    let weights: Option<Vec<f64>> = match &a.weights {
        None => None,
        Some(w) => {
            let text = if w.trim_start().starts_with('[') {
                w.clone()
            } else {
                read_to_string(w)?
            };
            Some(serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("weights: {e}")))?)
        }
    };
    let cfg = MeanConfig {
        max_iters: a.max_iters,
        grad_tol: a.grad_tol,
        step: a.step,
        scale: a.scale,
    };
    let line0 = first_record_line(&header);
    let out = match field {
        Field::Real => mean_of::<f64>(&records, line0, weights.as_deref(), &cfg)?,
        Field::Complex => mean_of::<Complex64>(&records, line0, weights.as_deref(), &cfg)?,
    };
    let mut text = serde_json::to_string(&out).map_err(FormatError::from)?;
    text.push('\n');
    write_output(a.out.as_deref(), text.as_bytes())?;
    if !out.converged {
        return Err(CliError::Failed(format!(
            "Karcher iteration stopped after {} iterations with gradient norm {:e}",
            out.iterations, out.final_grad_norm
        )));
    }
    Ok(())
}

fn mean_of<S: Scalar>(
    records: &[MatrixRecord],
    line0: usize,
    weights: Option<&[f64]>,
    cfg: &MeanConfig,
) -> Result<MeanOutput, CliError> {
    let points = records_to_unit_det::<S>(records, line0, true)?;
    let r = karcher_mean(&points, weights, cfg)?;
    Ok(MeanOutput {
        mean: MatrixRecord::from_unit_det(&r.mean),
        iterations: r.iterations,
        final_grad_norm: r.final_grad_norm,
        converged: r.converged,
    })
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid must be start:stop:step, got `{text}`"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(stop >= start) || start < 0.0 || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(CliError::Usage("grid has too many points".into()));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn density_cmd<S: Scalar>(a: &DensityArgs) -> Result<(), CliError> {
    if !(a.scale > 0.0) {
        return Err(CliError::Usage("scale must be positive".into()));
    }
    let mut out = String::new();
    match (&a.grid, &a.points) {
        (Some(grid), None) => {
            if a.d != 2 {
                return Err(CliError::Usage("the radial law is defined for d = 2 only".into()));
            }
            let law = RadialLaw::new(S::FIELD, a.n)?;
            // Radii are in units of the requested scale; the law is stated at 1/√2.
            let stretch = a.scale / DEFAULT_SCALE;
            out.push_str("r,pdf,cdf,log_pdf\n");
            for r in parse_grid(grid)? {
                let u = r / stretch;
                let _ = writeln!(
                    out,
                    "{r},{},{},{}",
                    law.pdf(u) / stretch,
                    law.cdf(u),
                    law.log_pdf(u) - stretch.ln()
                );
            }
        }
        (None, Some(points)) => {
            let sigma = matrix_arg(&a.sigma, Some(a.d), S::FIELD)?;
            let params = WishartParams::new(sigma.to_spd::<S>()?, a.n)?;
            if params.n() < a.d {
                return Err(CliError::Usage(format!("n must be at least d = {}", a.d)));
            }
            let (header, records) = read_batch(open_input(points)?)?;
            let pts = records_to_unit_det::<S>(&records, first_record_line(&header), true)?;
            if let Some(p) = pts.iter().find(|p| p.dim() != a.d) {
                return Err(CliError::Usage(format!("point has dim {}, expected {}", p.dim(), a.d)));
            }
            density_points(&mut out, &pts, &params, a)?;
        }
        _ => return Err(CliError::Usage("give exactly one of --grid or --points".into())),
    }
    Ok(write_output(a.out.as_deref(), out.as_bytes())?)
}

fn density_points<S: Scalar>(
    out: &mut String,
    pts: &[UnitDetPoint<S>],
    params: &WishartParams<S>,
    a: &DensityArgs,
) -> Result<(), CliError> {
    let two = a.d == 2;
    if a.normalized && !two {
        return Err(CliError::Usage("--normalized needs d = 2".into()));
    }
    let log_c = if a.normalized {
        Some(normalize_density_2d(S::FIELD, a.n, a.scale)?)
    } else {
        None
    };
    out.push_str("index,log_density_trace");
    if two {
        out.push_str(",distance,log_density_cosh");
    }
    if log_c.is_some() {
        out.push_str(",log_density_normalized");
    }
    out.push('\n');
    let bar = params.sigma_bar();
    for (i, x) in pts.iter().enumerate() {
        let _ = write!(out, "{i},{}", projective_logdensity_trace(x, params)?.log_value);
        if two {
            let cosh = projective_logdensity_cosh(x, params)?.log_value;
            let _ = write!(out, ",{},{cosh}", distance(x, &bar, a.scale)?);
            if let Some(c) = log_c {
                let _ = write!(out, ",{}", c + cosh);
            }
        }
        out.push('\n');
    }
    Ok(())
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn verify_cmd(a: &VerifyArgs) -> Result<(), CliError> {
    let text = read_to_string(&a.config)?;
    let spec = SuiteSpec::from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.threads == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let started = unix_now();
    let mut reports = Vec::new();
    for e in &spec.experiments {
        let clock = Instant::now();
        let run = pool
            .install(|| run_experiment(e, spec.seed))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for f in &run.side_files {
            write_atomic(&a.out_dir.join(&f.name), f.contents.as_bytes())?;
        }
        let mut report = run.report;
        if a.timestamps {
            report.elapsed_seconds = Some(clock.elapsed().as_secs_f64());
        }
        eprintln!("{} {}", if report.passed { "done" } else { "FAILED" }, report.id);
        reports.push(report);
    }
    let suite = SuiteReport {
        tool_version: TOOL_VERSION.to_string(),
        seed: spec.seed,
        passed: reports.iter().all(|r| r.passed),
        experiments: reports,
        started_unix: a.timestamps.then_some(started),
        finished_unix: a.timestamps.then(unix_now),
    };
    let mut json = serde_json::to_string_pretty(&suite).map_err(FormatError::from)?;
    json.push('\n');
    write_atomic(&a.out_dir.join("report.json"), json.as_bytes())?;
    print!("{}", summarize(&suite));
    if suite.passed {
        Ok(())
    } else {
        Err(CliError::Failed("one or more experiments failed".into()))
    }
}

fn report_cmd(a: &ReportArgs) -> Result<(), CliError> {
    let text = read_to_string(&a.report)?;
    let suite: SuiteReport = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("report: {e}")))?;
    print!("{}", summarize(&suite));
    if suite.passed {
        Ok(())
    } else {
        Err(CliError::Failed("report records failed experiments".into()))
    }
}
