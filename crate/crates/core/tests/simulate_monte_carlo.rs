//! Statistical checks on the generators.

mod common;

use cholcov::linalg::{cholesky_decompose, sample_covariance, Centering};
use cholcov::simulate::{fixed_sigma, random_sparse_cholesky, sample_gaussian, ScenarioKind};
use cholcov::LowerTriangular;
use common::{random_factor, rng};

#[test]
fn realized_density_matches_target() {
    let mut r = rng(51);
    let p = 30;
    let lower = (p * (p - 1) / 2) as f64;
    for target in [1.0 / 30.0, 2.0 / 30.0, 3.0 / 30.0] {
        let mean = (0..200)
            .map(|_| {
                random_sparse_cholesky(p, target, &mut r).strictly_lower_nonzeros(0.0) as f64
                    / lower
            })
            .sum::<f64>()
            / 200.0;
        assert!(
            (mean - target).abs() <= 0.05,
            "target {target}: mean {mean}"
        );
    }
}

#[test]
fn generated_factors_are_valid() {
    let mut r = rng(52);
    for _ in 0..50 {
        let t = random_sparse_cholesky(20, 0.2, &mut r);
        assert!(t.diagonal().iter().all(|&d| d > 0.0));
        for i in 0..20 {
            for j in 0..i {
                let v = t.get(i, j).abs();
                assert!(v == 0.0 || (0.1..=1.0).contains(&v));
            }
        }
        cholesky_decompose(&t.gram()).unwrap();
    }
    for kind in [
        ScenarioKind::Ar1,
        ScenarioKind::Banded4,
        ScenarioKind::Dense05,
    ] {
        for p in [2, 10, 30, 100] {
            cholesky_decompose(&fixed_sigma(kind, p).unwrap()).unwrap();
        }
    }
}

#[test]
fn identity_factor_gives_identity_covariance() {
    let data = sample_gaussian(&LowerTriangular::identity(5), 20_000, &mut rng(53)).unwrap();
    let s = sample_covariance(&data, Centering::Zero);
    let dev = s.max_abs_diff(&cholcov::DenseMatrix::identity(5)).unwrap();
    assert!(dev <= 0.05, "{dev}");
}

#[test]
fn sample_covariance_approaches_the_model() {
    let mut r = rng(54);
    for p in [3, 6, 10] {
        let t = random_factor(p, &mut r);
        let data = sample_gaussian(&t, 50_000, &mut r).unwrap();
        let dev = sample_covariance(&data, Centering::Zero)
            .max_abs_diff(&t.gram())
            .unwrap();
        assert!(dev <= 0.06, "p = {p}: {dev}");
    }
}

#[test]
fn known_sigma_is_recovered_at_ten_thousand_draws() {
    let sigma = fixed_sigma(ScenarioKind::Ar1, 6).unwrap();
    let t = cholesky_decompose(&sigma).unwrap();
    let data = sample_gaussian(&t, 10_000, &mut rng(55)).unwrap();
    let dev = sample_covariance(&data, Centering::Mean)
        .max_abs_diff(&sigma)
        .unwrap();
    assert!(dev <= 0.05, "{dev}");
}

#[test]
fn same_seed_same_draws() {
    let a = random_sparse_cholesky(15, 0.3, &mut rng(56));
    let b = random_sparse_cholesky(15, 0.3, &mut rng(56));
    assert_eq!(a, b);
    let x = sample_gaussian(&a, 10, &mut rng(57)).unwrap();
    let y = sample_gaussian(&b, 10, &mut rng(57)).unwrap();
    assert_eq!(x.values(), y.values());
}
