//! Experiment configuration, read from TOML and overridable from flags.
//!
//! ```toml
//! methods = ["mband", "mlasso", "mglik", "mgfrob"]
//! replicates = 20
//! out = "runs/banded"
//!
//! [scenario]
//! kind = "BANDED4"
//! p = 30
//! n = 200
//! seed = 1
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use cholcov::io::{CsvOptions, LabelColumn};
use cholcov::prox::SolverConfig;
use cholcov::regression::LassoConfig;
use cholcov::selection::DEFAULT_FOLDS;
use cholcov::simulate::ScenarioSpec;
use cholcov::{EstimatorSpec, Method, Tuning};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Label column as written in a config: `"last"`, a 0-based index, or a
/// header name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelSpec {
    Index(usize),
    Name(String),
}

impl LabelSpec {
    pub fn to_column(&self) -> LabelColumn {
        match self {
            LabelSpec::Index(i) => LabelColumn::Index(*i),
            LabelSpec::Name(s) if s.eq_ignore_ascii_case("last") => LabelColumn::Last,
            LabelSpec::Name(s) => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.clone()),
            },
        }
    }
}

/// How a labelled dataset is split for classification.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Protocol {
    #[default]
    Loocv,
    /// Stratified split; `fraction` of each class trains.
    Split { fraction: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    /// Name written to result rows; defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub has_header: bool,
    #[serde(default)]
    pub label_column: Option<LabelSpec>,
    #[serde(default)]
    pub protocol: Protocol,
    /// Seed for the stratified split.
    #[serde(default)]
    pub seed: u64,
}

impl DatasetConfig {
    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            has_header: self.has_header,
            label_column: self.label_column.as_ref().map(LabelSpec::to_column),
        }
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path.file_stem().map_or_else(
                || "dataset".to_owned(),
                |s| s.to_string_lossy().into_owned(),
            )
        })
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_replicates() -> usize {
    1
}

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: Option<ScenarioSpec>,
    #[serde(default)]
    pub dataset: Option<DatasetConfig>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Penalty candidates for `mlasso`, `mglik` and `mgfrob`.
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    /// Band candidates for `mband`.
    #[serde(default)]
    pub k_grid: Option<Vec<usize>>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Standardize simulated samples before fitting.
    #[serde(default)]
    pub standardize: bool,
    /// Fill `wall_time_s`; off by default so reruns are byte-identical.
    #[serde(default)]
    pub timing: bool,
    /// Write true and fitted factors next to the results.
    #[serde(default)]
    pub emit_matrices: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub lasso: LassoConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: None,
            dataset: None,
            methods: default_methods(),
            replicates: default_replicates(),
            lambda_grid: None,
            k_grid: None,
            folds: default_folds(),
            standardize: false,
            timing: false,
            emit_matrices: false,
            out: None,
            format: OutputFormat::default(),
            solver: SolverConfig::default(),
            lasso: LassoConfig::default(),
        }
    }
}

/// Parses and validates a TOML config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.replicates < 1 {
            return bad("replicates must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return bad("methods are listed more than once".into());
        }
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if let Some(grid) = &self.lambda_grid {
            if grid.is_empty() || grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                return bad("lambda grid must be non-empty, finite and non-negative".into());
            }
        }
        if matches!(&self.k_grid, Some(g) if g.is_empty()) {
            return bad("k grid must be non-empty".into());
        }
        if let Some(s) = &self.scenario {
            s.validate()?;
        }
        if let Some(d) = &self.dataset {
            if let Protocol::Split { fraction } = d.protocol {
                if !(fraction > 0.0 && fraction < 1.0) {
                    return bad(format!("split fraction must lie in (0, 1), got {fraction}"));
                }
            }
        }
        self.solver.validate()?;
        self.lasso.validate()?;
        Ok(())
    }

    /// Estimator settings for `method` under this config.
    pub fn estimator(&self, method: Method) -> EstimatorSpec {
        let grid = match method {
            Method::Band => self
                .k_grid
                .as_ref()
                .map(|g| g.iter().map(|&k| k as f64).collect()),
            _ => self.lambda_grid.clone(),
        };
        let tuning = match grid.as_deref() {
            Some([single]) => Tuning::Fixed(*single),
            _ => Tuning::CrossValidate {
                folds: self.folds,
                grid,
            },
        };
        EstimatorSpec {
            method,
            tuning,
            solver: self.solver,
            lasso: self.lasso,
        }
    }
}
