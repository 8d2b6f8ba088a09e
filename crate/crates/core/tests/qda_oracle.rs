//! QDA scoring against dense Gaussian densities, and end-to-end accuracy
//! on separable synthetic data.

mod common;

use cholcov::linalg::{cholesky_decompose, Labels};
use cholcov::qda::{classify, evaluate_loocv, fit_qda, log_joint, ClassModel};
use cholcov::simulate::sample_gaussian;
use cholcov::{DataSample, DenseMatrix, EstimatorSpec, LowerTriangular, Method};
use common::{random_factor, rng, to_na};
use nalgebra::DVector;
use rand::Rng;

fn model(class: usize, mean: Vec<f64>, factor: LowerTriangular, prior: f64) -> ClassModel {
    ClassModel {
        class,
        name: format!("c{class}"),
        mean,
        factor,
        prior,
        hyperparameter: 0.0,
    }
}

/// `ln prior - 1/2 ln det Sigma - 1/2 (x - mu)^t Sigma^{-1} (x - mu)`
/// with a dense inverse and determinant.
fn dense_log_joint(sigma: &DenseMatrix, mean: &[f64], prior: f64, x: &[f64]) -> f64 {
    let s = to_na(sigma);
    let d = DVector::from_iterator(x.len(), x.iter().zip(mean).map(|(a, m)| a - m));
    let quad = (d.transpose() * s.clone().try_inverse().unwrap() * &d)[(0, 0)];
    prior.ln() - 0.5 * s.determinant().ln() - 0.5 * quad
}

/// Two classes with shifted means, stacked as labelled data.
fn two_class_sample(
    factors: [&LowerTriangular; 2],
    shift: f64,
    n_per_class: usize,
    seed: u64,
) -> DataSample {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut names = Vec::new();
    for (c, t) in factors.iter().enumerate() {
        let sample = sample_gaussian(t, n_per_class, &mut r).unwrap();
        for i in 0..n_per_class {
            rows.push(
                sample
                    .row(i)
                    .iter()
                    .map(|v| v + shift * c as f64)
                    .collect::<Vec<_>>(),
            );
            names.push(if c == 0 { "a" } else { "b" });
        }
    }
    DataSample::from_rows(&rows)
        .unwrap()
        .with_labels(Labels::from_names(&names))
        .unwrap()
}

#[test]
fn log_joint_matches_dense_density() {
    let mut r = rng(61);
    for _ in 0..30 {
        let t = random_factor(6, &mut r);
        let mean: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..6).map(|_| r.random_range(-2.0..2.0)).collect();
        let prior = r.random_range(0.1..1.0);
        let ours = log_joint(&model(0, mean.clone(), t.clone(), prior), &x).unwrap();
        let dense = dense_log_joint(&t.gram(), &mean, prior, &x);
        assert!((ours - dense).abs() <= 1e-9, "{ours} vs {dense}");
    }
}

#[test]
fn scaling_the_factor_costs_p_ln2_at_the_mean() {
    let mut r = rng(62);
    let t = random_factor(7, &mut r);
    let mean = vec![0.3; 7];
    let a = log_joint(&model(0, mean.clone(), t.clone(), 0.4), &mean).unwrap();
    let b = log_joint(&model(0, mean.clone(), t.scaled(2.0).unwrap(), 0.4), &mean).unwrap();
    assert!((a - b - 7.0 * 2f64.ln()).abs() <= 1e-12);
}

#[test]
fn symmetric_tie_goes_to_smaller_id() {
    let t = LowerTriangular::identity(3);
    let models = vec![
        model(1, vec![1.0, 0.0, 0.0], t.clone(), 0.5),
        model(0, vec![-1.0, 0.0, 0.0], t, 0.5),
    ];
    assert_eq!(classify(&models, &[0.0, 0.0, 0.0]).unwrap(), 0);
}

#[test]
fn fitted_class_covariances_approach_truth() {
    let mut r = rng(63);
    let (ta, tb) = (random_factor(4, &mut r), random_factor(4, &mut r));
    let data = two_class_sample([&ta, &tb], 3.0, 5000, 64);
    let fit = fit_qda(&data, &EstimatorSpec::fixed(Method::Band, 3.0)).unwrap();
    for (m, t) in fit.models.iter().zip([&ta, &tb]) {
        let err = m.factor.gram().sub(&t.gram()).unwrap().frobenius_norm();
        assert!(err <= 0.1, "class {}: {err}", m.name);
        assert!((m.prior - 0.5).abs() < 1e-12);
    }
}

#[test]
fn predictions_agree_with_the_bayes_rule() {
    let mut r = rng(65);
    let (ta, tb) = (random_factor(4, &mut r), random_factor(4, &mut r));
    let train = two_class_sample([&ta, &tb], 2.0, 2000, 66);
    let test = two_class_sample([&ta, &tb], 2.0, 1000, 67);
    let fit = fit_qda(&train, &EstimatorSpec::fixed(Method::Band, 3.0)).unwrap();
    let truth_means = [vec![0.0; 4], vec![2.0; 4]];
    let agree = (0..test.n())
        .filter(|&i| {
            let x = test.row(i);
            let bayes = [0, 1]
                .into_iter()
                .map(|c| dense_log_joint(&[&ta, &tb][c].gram(), &truth_means[c], 0.5, x))
                .collect::<Vec<_>>();
            let bayes_label = usize::from(bayes[1] > bayes[0]);
            classify(&fit.models, x).unwrap() == bayes_label
        })
        .count();
    let rate = agree as f64 / test.n() as f64;
    assert!(rate >= 0.95, "{rate}");
}

#[test]
fn loocv_separates_well_separated_classes() {
    let t = LowerTriangular::from_diagonal(&[0.3, 0.3, 0.3]).unwrap();
    let data = two_class_sample([&t, &t], 3.0, 30, 68);
    for method in [Method::Band, Method::ProxNll] {
        let spec = match method {
            Method::Band => EstimatorSpec::fixed(method, 0.0),
            _ => EstimatorSpec::fixed(method, 0.05),
        };
        let report = evaluate_loocv(&data, &spec).unwrap();
        assert!(report.accuracy >= 0.95, "{method}: {}", report.accuracy);
        assert_eq!(report.confusion.iter().flatten().sum::<usize>(), 60);
    }
}

#[test]
fn fitted_factor_is_cholesky_of_class_covariance_at_full_band() {
    let mut r = rng(69);
    let t = random_factor(3, &mut r);
    let data = two_class_sample([&t, &t], 1.0, 50, 70);
    let fit = fit_qda(&data, &EstimatorSpec::fixed(Method::Band, 2.0)).unwrap();
    let class_a = data.select_rows(&(0..50).collect::<Vec<_>>()).unwrap();
    let direct = cholesky_decompose(&cholcov::linalg::sample_covariance(
        &class_a,
        cholcov::linalg::Centering::Mean,
    ))
    .unwrap();
    assert!(
        fit.models[0]
            .factor
            .as_dense()
            .max_abs_diff(direct.as_dense())
            .unwrap()
            <= 1e-10
    );
}
