//! Support-recovery metrics over strictly-lower entries, and per-class
//! classification metrics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Default zero tolerance for solver outputs.
pub const SOLVER_ZERO_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportComparison {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tpr: f64,
    pub tdr: f64,
    pub f1: f64,
}

/// Compares the strictly-lower supports of `truth` and `estimate` (entries
/// with `|x| > zero_tol`). The diagonal is excluded.
///
/// Fails with `UndefinedMetric` when either support is empty or when TPR and
/// TDR are both zero.
pub fn support_metrics(
    truth: &DenseMatrix,
    estimate: &DenseMatrix,
    zero_tol: f64,
) -> Result<SupportComparison> {
    if truth.shape() != estimate.shape() || !truth.is_square() {
        return Err(Error::dims(
            format!("square {}x{}", truth.rows(), truth.cols()),
            format!("{}x{}", estimate.rows(), estimate.cols()),
        ));
    }
    if !(zero_tol >= 0.0) {
        return Err(Error::InvalidConfig("zero tolerance must be >= 0".into()));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for i in 1..truth.rows() {
        for j in 0..i {
            match (
                truth[(i, j)].abs() > zero_tol,
                estimate[(i, j)].abs() > zero_tol,
            ) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    if tp + fn_ == 0 {
        return Err(Error::UndefinedMetric("TPR: true support is empty"));
    }
    if tp + fp == 0 {
        return Err(Error::UndefinedMetric("TDR: estimated support is empty"));
    }
    let tpr = tp as f64 / (tp + fn_) as f64;
    let tdr = tp as f64 / (tp + fp) as f64;
    if tpr + tdr == 0.0 {
        return Err(Error::UndefinedMetric("F1: no true positives"));
    }
    Ok(SupportComparison {
        tp,
        fp,
        fn_,
        tpr,
        tdr,
        f1: 2.0 * tpr * tdr / (tpr + tdr),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassScores {
    pub class: String,
    pub tnr: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassScores>,
    pub accuracy: f64,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<usize>>,
}

/// One-vs-rest TNR and F1 per class plus overall accuracy. Labels are
/// class names; both slices must only contain names listed in `classes`.
///
/// A rate whose denominator is empty (e.g. F1 for a class that is neither
/// present nor predicted) is reported as 1 when there is nothing to get
/// wrong and 0 otherwise.
pub fn classification_metrics<S: AsRef<str>>(
    true_labels: &[S],
    predicted_labels: &[S],
    classes: &[S],
) -> Result<ClassificationReport> {
    if true_labels.len() != predicted_labels.len() {
        return Err(Error::dims(
            format!("{} predictions", true_labels.len()),
            predicted_labels.len(),
        ));
    }
    if true_labels.is_empty() {
        return Err(Error::EmptySample);
    }
    let index = |s: &S| {
        classes
            .iter()
            .position(|c| c.as_ref() == s.as_ref())
            .ok_or_else(|| Error::LabelMismatch(s.as_ref().to_owned()))
    };
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (t, p) in true_labels.iter().zip(predicted_labels) {
        confusion[index(t)?][index(p)?] += 1;
    }
    Ok(report_from_confusion(
        classes.iter().map(|c| c.as_ref().to_owned()).collect(),
        confusion,
    ))
}

pub(crate) fn report_from_confusion(
    classes: Vec<String>,
    confusion: Vec<Vec<usize>>,
) -> ClassificationReport {
    let k = classes.len();
    let n: usize = confusion.iter().flatten().sum();
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            if num == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            num as f64 / den as f64
        }
    };
    let per_class = classes
        .into_iter()
        .enumerate()
        .map(|(c, class)| {
            let tp = confusion[c][c];
            let actual: usize = confusion[c].iter().sum();
            let predicted: usize = (0..k).map(|r| confusion[r][c]).sum();
            let fp = predicted - tp;
            let fn_ = actual - tp;
            let tn = n - tp - fp - fn_;
            ClassScores {
                class,
                tnr: ratio(tn, tn + fp),
                f1: ratio(2 * tp, 2 * tp + fp + fn_),
            }
        })
        .collect();
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    ClassificationReport {
        per_class,
        accuracy: correct as f64 / n as f64,
        confusion,
    }
}
