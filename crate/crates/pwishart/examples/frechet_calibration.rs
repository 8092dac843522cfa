//! Spread of `d(karcher_mean, Σ̄)` at N = 10⁵ over 20 independent replicates
//! per configuration, for choosing the Fréchet experiment tolerance.
//!
//! cargo run --release -p pwishart --example frechet_calibration

use pwishart::config::{Expect, ExperimentSpec, FrechetSpec, SigmaSpec};
use pwishart::verify::run_experiment;

fn main() {
    let configs = [(2, "real", 5), (2, "complex", 4), (3, "real", 6), (3, "complex", 6)];
    for (d, field, n) in configs {
        let spec = ExperimentSpec::Frechet(FrechetSpec {
            id: format!("calibration-{field}-d{d}-n{n}"),
            seed: Some(777),
            expect: Expect::Pass,
            d,
            field: serde_json::from_value(serde_json::json!(field)).unwrap(),
            n,
            sigmas: vec![SigmaSpec::Named("random".into())],
            samples: 100_000,
            replicates: 20,
            tolerance: 0.02,
            ratio_range: [0.3, 0.8],
        });
        let run = run_experiment(&spec, 0).expect("calibration run");
        let mut dist: Vec<f64> = serde_json::from_value(run.report.details["per_sigma"][0]["distances"].clone()).unwrap();
        dist.sort_by(f64::total_cmp);
        let mean = dist.iter().sum::<f64>() / dist.len() as f64;
        println!(
            "{field} d={d} n={n}: mean {mean:.5} median {:.5} max {:.5} rms {:.5}",
            dist[dist.len() / 2],
            dist[dist.len() - 1],
            run.report.details["rms_distance_full"].as_f64().unwrap()
        );
    }
}
