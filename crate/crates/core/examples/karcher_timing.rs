//! Times a Karcher mean of projective Wishart samples.
//!
//! `cargo run --release -p pwishart-core --example karcher_timing`

use std::time::Instant;

use pwishart_core::frechet::karcher_mean;
use pwishart_core::manifold::distance;
use pwishart_core::sampling::random_spd;
use pwishart_core::{Complex64, MeanConfig, RngStream, Scalar, WishartParams, WishartSampler};

fn run<S: Scalar>(d: usize, n: usize, count: usize) {
    let mut rng = RngStream::new(1, 0);
    let sigma = random_spd::<S>(d, &mut rng).unwrap();
    let sampler = WishartSampler::new(WishartParams::new(sigma, n).unwrap()).unwrap();
    let t0 = Instant::now();
    let pts = sampler.sample_projective_batch(count, &mut rng).unwrap();
    let t1 = Instant::now();
    let r = karcher_mean(&pts, None, &MeanConfig::default()).unwrap();
    let t2 = Instant::now();
    let err = distance(&r.mean, &sampler.params().sigma_bar(), MeanConfig::default().scale).unwrap();
    println!(
        "{} d={d} n={n} N={count}: sample {:.2?}, mean {:.2?} ({} iters, grad {:.1e}, converged {}), d(mean, sigma_bar) = {err:.4}",
        S::FIELD,
        t1 - t0,
        t2 - t1,
        r.iterations,
        r.final_grad_norm,
        r.converged
    );
}

fn main() {
    run::<f64>(2, 5, 100_000);
    run::<Complex64>(2, 4, 100_000);
    run::<f64>(3, 6, 100_000);
    run::<Complex64>(3, 6, 100_000);
}
