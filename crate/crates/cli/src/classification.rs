//! QDA classification runs on a labelled dataset, one report per method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cholcov::io::ingest_csv;
use cholcov::metrics::ClassificationReport;
use cholcov::qda::{evaluate_loocv, evaluate_split};
use cholcov::{DataSample, Method};

use crate::config::{DatasetConfig, ExperimentConfig, Protocol};
use crate::error::{CliError, Result};

/// One row per (method, class); `accuracy` repeats on every row of a method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub method: String,
    pub dataset: String,
    pub protocol: String,
    pub n: usize,
    pub p: usize,
    pub class: String,
    pub tnr: f64,
    pub f1: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug)]
pub struct MethodReport {
    pub method: Method,
    pub report: ClassificationReport,
}

fn dataset_of(config: &ExperimentConfig) -> Result<&DatasetConfig> {
    config
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::Config("classification needs a [dataset] section".into()))
}

/// Loads the dataset, insisting on labels.
pub fn load_dataset(dataset: &DatasetConfig) -> Result<DataSample> {
    if dataset.label_column.is_none() {
        return Err(CliError::Config(format!(
            "dataset {} has no label column configured",
            dataset.path.display()
        )));
    }
    Ok(ingest_csv(&dataset.path, &dataset.csv_options())?)
}

/// Evaluates every configured method on already-loaded data.
pub fn classify_sample(
    data: &DataSample,
    protocol: Protocol,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<Vec<MethodReport>> {
    config
        .methods
        .par_iter()
        .map(|&method| {
            let spec = config.estimator(method);
            let report = match protocol {
                Protocol::Loocv => evaluate_loocv(data, &spec),
                Protocol::Split { fraction } => evaluate_split(data, &spec, fraction, seed),
            }
            .map_err(|source| CliError::Method {
                method: method.name().to_owned(),
                source,
            })?;
            Ok(MethodReport { method, report })
        })
        .collect()
}

/// Reads the configured dataset and evaluates every method on it.
pub fn run_classification(config: &ExperimentConfig) -> Result<(DataSample, Vec<MethodReport>)> {
    config.validate()?;
    let dataset = dataset_of(config)?;
    let data = load_dataset(dataset)?;
    let reports = classify_sample(&data, dataset.protocol, dataset.seed, config)?;
    Ok((data, reports))
}

pub fn protocol_name(protocol: Protocol) -> String {
    match protocol {
        Protocol::Loocv => "loocv".to_owned(),
        Protocol::Split { fraction } => format!("split{fraction}"),
    }
}

pub fn classification_rows(
    dataset: &str,
    protocol: Protocol,
    data: &DataSample,
    reports: &[MethodReport],
) -> Vec<ClassificationRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.report.per_class.iter().map(move |c| ClassificationRow {
                method: r.method.name().to_owned(),
                dataset: dataset.to_owned(),
                protocol: protocol_name(protocol),
                n: data.n(),
                p: data.p(),
                class: c.class.clone(),
                tnr: c.tnr,
                f1: c.f1,
                accuracy: r.report.accuracy,
            })
        })
        .collect()
}
