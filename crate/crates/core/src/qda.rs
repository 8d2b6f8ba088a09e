//! Quadratic discriminant analysis through per-class Cholesky factors.
//!
//! The class score is the Gaussian log-joint
//! `ln f(c) - sum_i ln t_ii - 1/2 ||T_c^{-1} (x - mu_c)||^2`, evaluated with a
//! single triangular solve.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorSpec};
use crate::linalg::{DataSample, Labels, LowerTriangular, Standardization};
use crate::metrics::{report_from_confusion, ClassificationReport};
use crate::simulate::rng_from_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassModel {
    pub class: usize,
    pub name: String,
    pub mean: Vec<f64>,
    pub factor: LowerTriangular,
    pub prior: f64,
    /// Hyperparameter the class factor was fitted with.
    pub hyperparameter: f64,
}

/// Class models plus the class names they index into.
#[derive(Clone, Debug, PartialEq)]
pub struct QdaModel {
    pub classes: Vec<String>,
    pub models: Vec<ClassModel>,
}

fn rows_by_class(labels: &Labels) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); labels.n_classes()];
    for (r, &c) in labels.ids().iter().enumerate() {
        by_class[c].push(r);
    }
    by_class
}

fn fit_class(
    data: &DataSample,
    rows: &[usize],
    class: usize,
    name: &str,
    n_total: usize,
    estimator: &EstimatorSpec,
) -> Result<ClassModel> {
    let annotate = |e: Error| Error::ClassFit {
        class: name.to_owned(),
        source: Box::new(e),
    };
    if rows.len() < 2 {
        return Err(annotate(Error::InvalidConfig(format!(
            "class has {} training rows, need at least 2",
            rows.len()
        ))));
    }
    let subset = data.select_rows(rows).map_err(annotate)?;
    let mean = subset.column_means();
    let centered = subset.centered();
    let fitted = estimate(&centered, estimator).map_err(annotate)?;
    Ok(ClassModel {
        class,
        name: name.to_owned(),
        mean,
        factor: fitted.factor,
        prior: rows.len() as f64 / n_total as f64,
        hyperparameter: fitted.hyperparameter,
    })
}

/// Fits one model per class present in `data` (class mean, class-centered
/// factor, class proportion as prior).
pub fn fit_qda(data: &DataSample, estimator: &EstimatorSpec) -> Result<QdaModel> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::InvalidConfig("QDA needs labelled data".into()))?;
    let models = rows_by_class(labels)
        .iter()
        .enumerate()
        .filter(|(_, rows)| !rows.is_empty())
        .map(|(c, rows)| fit_class(data, rows, c, labels.class_name(c), data.n(), estimator))
        .collect::<Result<Vec<_>>>()?;
    Ok(QdaModel {
        classes: labels.classes().to_vec(),
        models,
    })
}

/// `ln prior - sum ln t_ii - 1/2 ||T^{-1} (x - mu)||^2`.
pub fn log_joint(model: &ClassModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.mean.len() {
        return Err(Error::dims(
            format!("vector of length {}", model.mean.len()),
            x.len(),
        ));
    }
    let centered: Vec<f64> = x.iter().zip(&model.mean).map(|(a, m)| a - m).collect();
    let z = model.factor.solve(&centered)?;
    let quad: f64 = z.iter().map(|v| v * v).sum();
    Ok(model.prior.ln() - model.factor.log_det() - 0.5 * quad)
}

/// Class id with the largest log-joint; ties go to the smallest id.
pub fn classify(models: &[ClassModel], x: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for m in models {
        let score = log_joint(m, x)?;
        best = match best {
            Some((c, s)) if s > score || (s == score && c < m.class) => Some((c, s)),
            _ => Some((m.class, score)),
        };
    }
    best.map(|(c, _)| c)
        .ok_or_else(|| Error::InvalidConfig("no class models".into()))
}

fn labels_of(data: &DataSample) -> Result<&Labels> {
    data.labels()
        .ok_or_else(|| Error::InvalidConfig("classification needs labelled data".into()))
}

/// Leave-one-out: each row is classified by models fitted on the other rows,
/// standardized with statistics of those rows.
///
/// Removing a row only changes its own class's model, but standardization
/// statistics change with every fold, so every class is refitted per fold.
pub fn evaluate_loocv(
    data: &DataSample,
    estimator: &EstimatorSpec,
) -> Result<ClassificationReport> {
    let labels = labels_of(data)?;
    let n = data.n();
    if n < labels.n_classes() + 1 {
        return Err(Error::InvalidConfig(format!(
            "LOOCV needs more than {} rows",
            labels.n_classes()
        )));
    }
    let k = labels.n_classes();
    let mut confusion = vec![vec![0usize; k]; k];
    for held in 0..n {
        let train_rows: Vec<usize> = (0..n).filter(|&r| r != held).collect();
        let predicted = fit_and_predict(data, &train_rows, &[held], estimator)?;
        confusion[labels.ids()[held]][predicted[0]] += 1;
    }
    Ok(report_from_confusion(labels.classes().to_vec(), confusion))
}

/// Standardizes with training statistics, fits on `train_rows`, and
/// predicts `test_rows`.
pub fn fit_and_predict(
    data: &DataSample,
    train_rows: &[usize],
    test_rows: &[usize],
    estimator: &EstimatorSpec,
) -> Result<Vec<usize>> {
    let train = data.select_rows(train_rows)?;
    let scaling = Standardization::fit(&train)?;
    let model = fit_qda(&scaling.apply(&train)?, estimator)?;
    let test = scaling.apply(&data.select_rows(test_rows)?)?;
    (0..test.n())
        .map(|r| classify(&model.models, test.row(r)))
        .collect()
}

/// Stratified random split: within each class, `round(fraction * n_c)` rows
/// (shuffled with `seed`) go to training. Returns `(train, test)` row
/// indices, each sorted.
pub fn stratified_split(
    labels: &Labels,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (c, mut rows) in rows_by_class(labels).into_iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        rows.shuffle(&mut rng);
        let cut = ((fraction * rows.len() as f64).round() as usize).min(rows.len());
        if cut == 0 || cut == rows.len() {
            return Err(Error::ClassMissingInSplit(labels.class_name(c).to_owned()));
        }
        train.extend_from_slice(&rows[..cut]);
        test.extend_from_slice(&rows[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Train/test evaluation on a stratified split.
pub fn evaluate_split(
    data: &DataSample,
    estimator: &EstimatorSpec,
    fraction: f64,
    seed: u64,
) -> Result<ClassificationReport> {
    let labels = labels_of(data)?;
    let (train, test) = stratified_split(labels, fraction, seed)?;
    let predicted = fit_and_predict(data, &train, &test, estimator)?;
    let k = labels.n_classes();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&r, &p) in test.iter().zip(&predicted) {
        confusion[labels.ids()[r]][p] += 1;
    }
    Ok(report_from_confusion(labels.classes().to_vec(), confusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Method;
    use crate::linalg::DenseMatrix;

    fn model(class: usize, mean: Vec<f64>, factor: LowerTriangular, prior: f64) -> ClassModel {
        ClassModel {
            class,
            name: class.to_string(),
            mean,
            factor,
            prior,
            hyperparameter: 0.0,
        }
    }

    #[test]
    fn identity_model_is_half_squared_norm() {
        let m = model(0, vec![0.0; 3], LowerTriangular::identity(3), 1.0);
        let v = log_joint(&m, &[1.0, 2.0, -2.0]).unwrap();
        assert!((v + 4.5).abs() < 1e-15);
        assert!(log_joint(&m, &[1.0]).is_err());
    }

    #[test]
    fn doubling_factor_costs_p_ln2_at_mean() {
        let t = LowerTriangular::from_dense(
            DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.3, 2.0]]).unwrap(),
        )
        .unwrap();
        let a = model(0, vec![1.0, 1.0], t.clone(), 0.5);
        let b = model(0, vec![1.0, 1.0], t.scaled(2.0).unwrap(), 0.5);
        let diff = log_joint(&a, &[1.0, 1.0]).unwrap() - log_joint(&b, &[1.0, 1.0]).unwrap();
        assert!((diff - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn ties_go_to_smaller_class() {
        let i2 = LowerTriangular::identity(2);
        let models = vec![
            model(1, vec![1.0, 0.0], i2.clone(), 0.5),
            model(0, vec![-1.0, 0.0], i2, 0.5),
        ];
        assert_eq!(classify(&models, &[0.0, 0.0]).unwrap(), 0);
        assert_eq!(classify(&models[..1], &[5.0, 5.0]).unwrap(), 1);
    }

    #[test]
    fn single_class_gets_prior_one() {
        let d = DataSample::from_rows(&[
            vec![1.0, 2.0],
            vec![2.0, 0.5],
            vec![0.0, 1.0],
            vec![1.5, 1.5],
        ])
        .unwrap()
        .with_labels(Labels::from_names(&["x", "x", "x", "x"]))
        .unwrap();
        let m = fit_qda(&d, &EstimatorSpec::fixed(Method::Band, 0.0)).unwrap();
        assert_eq!(m.models.len(), 1);
        assert_eq!(m.models[0].prior, 1.0);
        assert_eq!(m.models[0].factor.strictly_lower_nonzeros(0.0), 0);
    }

    #[test]
    fn split_is_seeded_disjoint_and_exhaustive() {
        let names: Vec<&str> = (0..40)
            .map(|i| if i % 3 == 0 { "a" } else { "b" })
            .collect();
        let labels = Labels::from_names(&names);
        let (tr, te) = stratified_split(&labels, 0.5, 7).unwrap();
        let (tr2, te2) = stratified_split(&labels, 0.5, 7).unwrap();
        assert_eq!((&tr, &te), (&tr2, &te2));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
        assert!(matches!(
            stratified_split(&labels, 0.0, 7),
            Err(Error::InvalidConfig(_))
        ));
        let lone = Labels::from_names(&["a", "b", "b", "b"]);
        assert!(matches!(
            stratified_split(&lone, 0.5, 1),
            Err(Error::ClassMissingInSplit(c)) if c == "a"
        ));
    }

    #[test]
    fn class_errors_are_annotated() {
        let d = DataSample::from_rows(&[vec![1.0, 2.0], vec![2.0, 0.5], vec![0.0, 1.0]])
            .unwrap()
            .with_labels(Labels::from_names(&["x", "x", "y"]))
            .unwrap();
        let err = fit_qda(&d, &EstimatorSpec::fixed(Method::Band, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ClassFit { class, .. } if class == "y"));
    }
}
