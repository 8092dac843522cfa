//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use pwishart::config::{ExperimentSpec, SuiteSpec};
use pwishart::verify::{run_experiment, ExperimentReport};
use pwishart_core::densities::{point_at_radius, projective_logdensity_cosh, projective_logdensity_trace};
use pwishart_core::manifold::{distance, distance_to_identity_eigen, exp_map, geodesic, log_map};
use pwishart_core::sampling::{random_spd, random_unit_det_group, random_unit_det_point, sample_stabilizer};
use pwishart_core::{Complex64, RngStream, Scalar, UnitDetPoint, WishartParams, DEFAULT_SCALE};

struct Outcome {
    passed: bool,
    detail: String,
}

fn default_suite() -> SuiteSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.json");
    SuiteSpec::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run_kind(suite: &SuiteSpec, kind: &str) -> Vec<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    suite
        .experiments
        .iter()
        .filter(|e| e.kind() == kind)
        .map(|e: &ExperimentSpec| pool.install(|| run_experiment(e, suite.seed)).unwrap().report)
        .collect()
}

fn experiments_outcome(reports: &[ExperimentReport]) -> Outcome {
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
    let controls = reports.iter().filter(|r| r.expect == pwishart::config::Expect::Reject).count();
    let mut detail = format!("{} experiments ({} negative controls)", reports.len(), controls);
    for r in reports {
        let checks: Vec<String> = r.checks.iter().map(|c| format!("{}={:.3e}", c.name, c.value)).collect();
        detail.push_str(&format!("\n      {} {:?}: {}", r.id, r.outcome, checks.join(" ")));
    }
    if !failed.is_empty() {
        detail.push_str(&format!("\n      failed: {}", failed.join(", ")));
    }
    Outcome {
        passed: failed.is_empty() && !reports.is_empty(),
        detail,
    }
}

fn criterion_frechet(suite: &SuiteSpec) -> Outcome {
    let clock = Instant::now();
    let reports = run_kind(suite, "frechet");
    let secs = clock.elapsed().as_secs_f64();
    let mut o = experiments_outcome(&reports);
    o.passed &= reports.len() == 4 && secs <= 300.0;
    o.detail = format!("{:.1} s (limit 300 s), {}", secs, o.detail);
    o
}

fn factorization<S: Scalar>(seed: u64) -> (f64, f64) {
    let mut rng = RngStream::new(seed, 0);
    let n = 4;
    let kn = (S::FIELD.k() as usize * n) as f64;
    let (mut spread, mut cross) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let p = WishartParams::new(random_spd::<S>(2, &mut rng).unwrap(), n).unwrap();
        let bar = p.sigma_bar();
        let mut diffs = Vec::new();
        let mut rows = Vec::new();
        for _ in 0..1000 {
            let rot = sample_stabilizer::<S>(2, &mut rng).unwrap();
            let x = point_at_radius(&bar, rot.mat(), 4.0 * rng.uniform()).unwrap();
            let t = projective_logdensity_trace(&x, &p).unwrap().log_value;
            let c = projective_logdensity_cosh(&x, &p).unwrap().log_value;
            diffs.push(t - c);
            rows.push((distance(&x, &bar, DEFAULT_SCALE).unwrap(), t));
        }
        let lo = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
        let offset = diffs.iter().sum::<f64>() / diffs.len() as f64;
        for (r, t) in rows {
            cross = cross.max((t - offset + kn * r.cosh().ln()).abs());
        }
    }
    (spread, cross)
}

fn criterion_factorization() -> Outcome {
    let (sr, cr) = factorization::<f64>(301);
    let (sc, cc) = factorization::<Complex64>(302);
    let passed = [sr, cr, sc, cc].iter().all(|&v| v <= 1e-9);
    Outcome {
        passed,
        detail: format!(
            "per-Σ spread real {sr:.2e} complex {sc:.2e}; cross-Σ deviation real {cr:.2e} complex {cc:.2e} (limit 1e-9)"
        ),
    }
}

struct Kernel {
    isometry: f64,
    round_trip: f64,
    fast_path: f64,
    triangle: f64,
}

fn moderate_point<S: Scalar>(d: usize, rng: &mut RngStream) -> UnitDetPoint<S> {
    let p = random_unit_det_point::<S>(d, rng).unwrap();
    geodesic(&UnitDetPoint::identity(d), &p, 2.0 * rng.uniform()).unwrap()
}

fn kernel<S: Scalar>(seed: u64) -> Kernel {
    let mut rng = RngStream::new(seed, 0);
    let mut k = Kernel {
        isometry: 0.0,
        round_trip: 0.0,
        fast_path: 0.0,
        triangle: f64::INFINITY,
    };
    for i in 0..1000 {
        let d = 2 + i % 3;
        let [x, y, z] = [0, 1, 2].map(|_| moderate_point::<S>(d, &mut rng));
        let g = random_unit_det_group::<S>(d, &mut rng).unwrap();
        let dxy = distance(&x, &y, DEFAULT_SCALE).unwrap();
        let moved = distance(&g.act(&x).unwrap(), &g.act(&y).unwrap(), DEFAULT_SCALE).unwrap();
        k.isometry = k.isometry.max((dxy - moved).abs() / dxy.max(1.0));

        let back = exp_map(&x, &log_map(&x, &y).unwrap()).unwrap();
        let err = back.mat().sub(y.mat()).frobenius_norm() / y.mat().frobenius_norm();
        k.round_trip = k.round_trip.max(err);

        let slow = distance(&x, &UnitDetPoint::identity(d), DEFAULT_SCALE).unwrap();
        let fast = distance_to_identity_eigen(&x, DEFAULT_SCALE).unwrap();
        k.fast_path = k.fast_path.max((slow - fast).abs());

        let dyz = distance(&y, &z, DEFAULT_SCALE).unwrap();
        let dxz = distance(&x, &z, DEFAULT_SCALE).unwrap();
        k.triangle = k.triangle.min(dxy + dyz - dxz);
    }
    k
}

fn criterion_kernel() -> Outcome {
    let r = kernel::<f64>(601);
    let c = kernel::<Complex64>(602);
    let passed = [r.isometry, c.isometry].iter().all(|&v| v <= 1e-9)
        && [r.round_trip, c.round_trip].iter().all(|&v| v <= 1e-10)
        && [r.fast_path, c.fast_path].iter().all(|&v| v <= 1e-9)
        && r.triangle >= -1e-9
        && c.triangle >= -1e-9;
    Outcome {
        passed,
        detail: format!(
            "isometry {:.2e}/{:.2e} (1e-9), log/exp {:.2e}/{:.2e} (1e-10), fast path {:.2e}/{:.2e} (1e-9), triangle slack min {:.2e}/{:.2e} (>= -1e-9) [real/complex, d = 2..4]",
            r.isometry, c.isometry, r.round_trip, c.round_trip, r.fast_path, c.fast_path, r.triangle, c.triangle
        ),
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pwishart")
}

fn run_cli(args: &[&str], stdin: Option<&Path>) -> (i32, Vec<u8>) {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    if let Some(p) = stdin {
        cmd.stdin(std::fs::File::open(p).unwrap());
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_determinism(dir: &Path) -> Outcome {
    let small = dir.join("small.json");
    std::fs::write(
        &small,
        r#"{"version":1,"seed":5,"experiments":[
            {"kind":"frechet","id":"f","d":2,"field":"complex","n":4,"samples":2000,"replicates":2,"tolerance":0.1,"ratio_range":[0.1,1.5]},
            {"kind":"radial_ks","id":"r","field":"real","n":5,"samples":2000},
            {"kind":"invariance","id":"i","d":3,"field":"real","n":4,"samples":1000,"rotations":10},
            {"kind":"density_consistency","id":"c","d":3,"field":"real","n":6,"samples":5000,"bins":8}]}"#,
    )
    .unwrap();
    let mut mismatched = Vec::new();
    let mut files = 0;
    for run in ["a", "b"] {
        let out = dir.join(run);
        std::fs::create_dir_all(&out).unwrap();
        let p = |name: &str| out.join(name).to_string_lossy().into_owned();
        let (sr, sc, ss, mean) = (p("real.jsonl"), p("complex.jsonl"), p("spd.jsonl"), p("mean.json"));
        let cmds: Vec<Vec<String>> = vec![
            vec!["sample", "--d", "2", "--field", "real", "--n", "5", "--count", "500", "--seed", "7", "--out", &sr],
            vec!["sample", "--d", "3", "--field", "complex", "--n", "4", "--sigma", "[[2,0.5,0],[0.5,1,0],[0,0,1]]", "--count", "300", "--seed", "8", "--stream", "3", "--out", &sc],
            vec!["sample", "--d", "3", "--field", "real", "--n", "6", "--output", "spd", "--count", "200", "--seed", "9", "--out", &ss],
            vec!["project", &ss, "--out", &p("projected.jsonl")],
            vec!["mean", &sc, "--out", &mean],
            vec!["density", "--field", "complex", "--n", "4", "--grid", "0:5:0.01", "--out", &p("grid.csv")],
            vec!["density", "--field", "real", "--n", "5", "--points", &sr, "--normalized", "--out", &p("points.csv")],
            vec!["distance", "--field", "real", "--input", &sr, "--out", &p("dist.txt")],
            vec!["verify", small.to_str().unwrap(), "--out-dir", &p("verify")],
        ]
        .into_iter()
        .map(|v| v.into_iter().map(String::from).collect())
        .collect();
        for c in &cmds {
            let args: Vec<&str> = c.iter().map(String::as_str).collect();
            let (code, _) = run_cli(&args, None);
            if code != 0 {
                return Outcome {
                    passed: false,
                    detail: format!("`pwishart {}` exited with {code}", args.join(" ")),
                };
            }
        }
    }
    let a_files = collect(&dir.join("a"));
    for rel in &a_files {
        files += 1;
        let x = std::fs::read(dir.join("a").join(rel)).unwrap();
        let y = std::fs::read(dir.join("b").join(rel)).unwrap_or_default();
        if x != y {
            mismatched.push(rel.display().to_string());
        }
    }
    Outcome {
        passed: mismatched.is_empty() && files >= 10,
        detail: format!(
            "{files} data files from sample/project/mean/density/distance/verify compared byte-for-byte across two runs; mismatched: {}",
            if mismatched.is_empty() { "none".into() } else { mismatched.join(", ") }
        ),
    }
}

fn collect(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![PathBuf::new()];
    while let Some(rel) = stack.pop() {
        for entry in std::fs::read_dir(root.join(&rel)).unwrap() {
            let entry = entry.unwrap();
            let r = rel.join(entry.file_name());
            if entry.file_type().unwrap().is_dir() {
                stack.push(r);
            } else {
                out.push(r);
            }
        }
    }
    out.sort();
    out
}

fn criterion_full_suite(dir: &Path) -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.json");
    let out = dir.join("full");
    let clock = Instant::now();
    let (code, stdout) = run_cli(
        &["verify", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--threads", "4"],
        None,
    );
    let secs = clock.elapsed().as_secs_f64();
    let summary = String::from_utf8_lossy(&stdout);
    let last = summary.lines().last().unwrap_or("").to_string();
    Outcome {
        passed: code == 0 && secs <= 600.0,
        detail: format!("exit {code}, {secs:.1} s (limit 600 s, 4 threads): {last}"),
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let suite = default_suite();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 Fréchet mean converges to the projected Σ", Box::new(|| criterion_frechet(&suite))),
        ("2 2×2 radial law (KS) with wrong-law controls", Box::new(|| experiments_outcome(&run_kind(&suite, "radial_ks")))),
        ("3 trace form factors through the cosh form", Box::new(criterion_factorization)),
        ("4 trace-form density beyond d = 2 (binned ratio test)", Box::new(|| experiments_outcome(&run_kind(&suite, "density_consistency")))),
        ("5 stabilizer isometry, fixed point and KS invariance", Box::new(|| experiments_outcome(&run_kind(&suite, "invariance")))),
        ("6 geometry kernel", Box::new(criterion_kernel)),
        ("7 CLI determinism", Box::new(|| criterion_determinism(dir.path()))),
        ("8 full verify suite runtime", Box::new(|| criterion_full_suite(dir.path()))),
    ];
    let mut failures = 0;
    for (name, f) in &criteria {
        let clock = Instant::now();
        let o = f();
        if !o.passed {
            failures += 1;
        }
        println!(
            "{} criterion {name} [{:.1} s]\n    {}",
            if o.passed { "PASS" } else { "FAIL" },
            clock.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
