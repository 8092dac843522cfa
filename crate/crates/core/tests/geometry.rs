use proptest::prelude::*;
use pwishart_core::eigen::{herm_eigen, matrix_function, SpectralFn};
use pwishart_core::manifold::{
    distance, distance_to_identity_eigen, exp_map, geodesic, log_map, project, theta, theta_inverse,
};
use pwishart_core::sampling::{random_spd, random_unit_det_group, random_unit_det_point};
use pwishart_core::{Complex64, HermMatrix, Mat, RngStream, Scalar, UnitDetPoint, DEFAULT_SCALE};

fn rel_diff<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> f64 {
    a.sub(b).frobenius_norm() / b.frobenius_norm().max(1.0)
}

/// Random point, pushed up to twice as far from the identity as
/// `random_unit_det_point` goes.
fn spread_point<S: Scalar>(d: usize, rng: &mut RngStream) -> UnitDetPoint<S> {
    let p = random_unit_det_point::<S>(d, rng).unwrap();
    let t = 2.0 * rng.uniform();
    geodesic(&UnitDetPoint::identity(d), &p, t).unwrap()
}

fn isometry<S: Scalar>(seed: u64) -> f64 {
    let mut worst = 0.0f64;
    let mut rng = RngStream::new(seed, 0);
    for i in 0..1000 {
        let d = 2 + i % 3;
        let x = spread_point::<S>(d, &mut rng);
        let y = spread_point::<S>(d, &mut rng);
        let g = random_unit_det_group::<S>(d, &mut rng).unwrap();
        let before = distance(&x, &y, DEFAULT_SCALE).unwrap();
        let after = distance(&g.act(&x).unwrap(), &g.act(&y).unwrap(), DEFAULT_SCALE).unwrap();
        worst = worst.max((before - after).abs() / before.max(1.0));
    }
    worst
}

#[test]
fn distance_is_invariant_under_one_thousand_group_elements() {
    assert!(isometry::<f64>(1) <= 1e-9);
    assert!(isometry::<Complex64>(2) <= 1e-9);
}

fn log_exp_round_trip<S: Scalar>(seed: u64) -> f64 {
    let mut rng = RngStream::new(seed, 0);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let d = 2 + i % 3;
        let x = spread_point::<S>(d, &mut rng);
        let y = spread_point::<S>(d, &mut rng);
        let v = log_map(&x, &y).unwrap();
        let back = exp_map(&x, &v).unwrap();
        worst = worst.max(rel_diff(back.mat().mat(), y.mat().mat()));
    }
    worst
}

#[test]
fn log_exp_round_trips() {
    assert!(log_exp_round_trip::<f64>(3) <= 1e-10);
    assert!(log_exp_round_trip::<Complex64>(4) <= 1e-10);
}

fn fast_path_agreement<S: Scalar>(seed: u64) -> f64 {
    let mut rng = RngStream::new(seed, 0);
    let id = |d| UnitDetPoint::<S>::identity(d);
    (0..1000)
        .map(|i| {
            let d = 2 + i % 3;
            let x = spread_point::<S>(d, &mut rng);
            let slow = distance(&x, &id(d), DEFAULT_SCALE).unwrap();
            let fast = distance_to_identity_eigen(&x, DEFAULT_SCALE).unwrap();
            (slow - fast).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn eigenvalue_fast_path_matches_matrix_log() {
    assert!(fast_path_agreement::<f64>(5) <= 1e-9);
    assert!(fast_path_agreement::<Complex64>(6) <= 1e-9);
}

fn triangle_slack<S: Scalar>(seed: u64) -> f64 {
    let mut rng = RngStream::new(seed, 0);
    (0..1000)
        .map(|i| {
            let d = 2 + i % 3;
            let [x, y, z] = [0, 1, 2].map(|_| spread_point::<S>(d, &mut rng));
            let dxy = distance(&x, &y, DEFAULT_SCALE).unwrap();
            let dyz = distance(&y, &z, DEFAULT_SCALE).unwrap();
            let dxz = distance(&x, &z, DEFAULT_SCALE).unwrap();
            dxy + dyz - dxz
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn triangle_inequality_on_random_triples() {
    assert!(triangle_slack::<f64>(7) >= -1e-9);
    assert!(triangle_slack::<Complex64>(8) >= -1e-9);
}

fn eigen_checks<S: Scalar>(seed: u64, d: usize) {
    let mut rng = RngStream::new(seed, 0);
    let a = random_spd::<S>(d, &mut rng).unwrap();
    // Shift to an indefinite matrix to exercise the general solver.
    let h = a.mat().sub(&HermMatrix::identity(d).scaled(a.mat().trace() / d as f64));
    let e1 = herm_eigen(&h).unwrap();
    let e2 = herm_eigen(&h).unwrap();
    assert_eq!(e1, e2);
    assert!(e1.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    let v = &e1.eigenvectors;
    let gram = &v.adjoint() * v;
    assert!(rel_diff(&gram, &Mat::identity(d)) <= 1e-12);
    let rebuilt = e1.map(|x| x);
    assert!(rel_diff(rebuilt.mat(), h.mat()) <= 1e-12);

    let sqrt = matrix_function(a.mat(), SpectralFn::Sqrt).unwrap();
    let sq = sqrt.mat() * sqrt.mat();
    assert!(rel_diff(&sq, a.mat().mat()) <= 1e-10);
    let log = matrix_function(a.mat(), SpectralFn::Log).unwrap();
    let back = matrix_function(&log, SpectralFn::Exp).unwrap();
    assert!(rel_diff(back.mat(), a.mat().mat()) <= 1e-10);
}

fn det_multiplicative<S: Scalar>(seed: u64, d: usize) {
    let mut rng = RngStream::new(seed, 0);
    let a = random_spd::<S>(d, &mut rng).unwrap().into_herm().into_mat();
    let b = random_unit_det_group::<S>(d, &mut rng).unwrap().mat().scaled(1.7);
    let lhs = (&a * &b).det();
    let rhs = a.det() * b.det();
    assert!((lhs.re() - rhs.re()).abs() + (lhs.im() - rhs.im()).abs() <= 1e-10 * (1.0 + rhs.abs()));
}

fn projection_and_theta<S: Scalar>(seed: u64, d: usize) {
    let mut rng = RngStream::new(seed, 0);
    let x = random_spd::<S>(d, &mut rng).unwrap();
    let c = 0.1 + 5.0 * rng.uniform();
    let p = project(&x);
    assert!((p.det() - 1.0).abs() <= 1e-10);
    let scaled = project(&x.scaled(c).unwrap());
    assert!(scaled.approx_eq(&p, 1e-12));
    let (u, t) = theta(&x);
    let back = theta_inverse(&u, t);
    assert!(rel_diff(back.mat().mat(), x.mat().mat()) <= 1e-12);
    let g = random_unit_det_group::<S>(d, &mut rng).unwrap();
    let lhs = project(&g.act(&x).unwrap());
    let rhs = g.act(&p).unwrap();
    assert!(lhs.approx_eq(&rhs, 1e-10));
}

fn geodesic_midpoint<S: Scalar>(seed: u64, d: usize) {
    let mut rng = RngStream::new(seed, 0);
    let x = spread_point::<S>(d, &mut rng);
    let y = spread_point::<S>(d, &mut rng);
    let m = geodesic(&x, &y, 0.5).unwrap();
    let dxy = distance(&x, &y, DEFAULT_SCALE).unwrap();
    let dxm = distance(&x, &m, DEFAULT_SCALE).unwrap();
    let dmy = distance(&m, &y, DEFAULT_SCALE).unwrap();
    assert!((dxm - 0.5 * dxy).abs() <= 1e-9 * (1.0 + dxy));
    assert!((dmy - 0.5 * dxy).abs() <= 1e-9 * (1.0 + dxy));
    assert!((distance(&y, &x, DEFAULT_SCALE).unwrap() - dxy).abs() <= 1e-10 * (1.0 + dxy));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_decomposition_invariants(seed in any::<u64>(), d in 2usize..=5) {
        eigen_checks::<f64>(seed, d);
        eigen_checks::<Complex64>(seed, d);
    }

    #[test]
    fn determinant_is_multiplicative(seed in any::<u64>(), d in 2usize..=5) {
        det_multiplicative::<f64>(seed, d);
        det_multiplicative::<Complex64>(seed, d);
    }

    #[test]
    fn projection_is_scale_free_and_equivariant(seed in any::<u64>(), d in 2usize..=4) {
        projection_and_theta::<f64>(seed, d);
        projection_and_theta::<Complex64>(seed, d);
    }

    #[test]
    fn geodesic_midpoint_halves_distance(seed in any::<u64>(), d in 2usize..=4) {
        geodesic_midpoint::<f64>(seed, d);
        geodesic_midpoint::<Complex64>(seed, d);
    }

    #[test]
    fn distance_scale_is_linear(seed in any::<u64>(), s in 0.1f64..4.0) {
        let mut rng = RngStream::new(seed, 0);
        let x = spread_point::<Complex64>(3, &mut rng);
        let y = spread_point::<Complex64>(3, &mut rng);
        let a = distance(&x, &y, s).unwrap();
        let b = distance(&x, &y, 1.0).unwrap();
        prop_assert!((a - s * b).abs() <= 1e-12 * (1.0 + a));
    }
}

