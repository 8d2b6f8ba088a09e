//! Experiment harness around `cholcov`: simulation sweeps, QDA
//! classification on labelled CSV data, one-shot estimation and the
//! regression-identity checks, with CSV or JSON output.

pub mod classification;
pub mod config;
pub mod error;
pub mod output;
pub mod simulation;
pub mod verify;

pub use config::{parse_config, ExperimentConfig};
pub use error::{CliError, Result};
