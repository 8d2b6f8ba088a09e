use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid lower-triangular factor: {0}")]
    InvalidFactor(String),

    #[error("sample has no observations")]
    EmptySample,

    #[error("column {0} has zero variance")]
    ZeroVariance(usize),

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("label {0:?} is not one of the declared classes")]
    LabelMismatch(String),

    #[error("band k = {k} must be smaller than min(N - 1, p) = {limit}")]
    BandTooLarge { k: usize, limit: usize },

    #[error("residual design for row {row} is rank deficient")]
    SingularDesign { row: usize },

    #[error("coordinate descent did not converge in {sweeps} sweeps (row {row})")]
    ConvergenceFailure { row: usize, sweeps: usize },

    #[error("line search stalled at iteration {iteration}: step fell below {min_step:e}")]
    LineSearchStall { iteration: usize, min_step: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("class {0:?} is missing from one side of the split")]
    ClassMissingInSplit(String),

    #[error("class {class:?}: {source}")]
    ClassFit {
        class: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("ragged rows: line {line} has {found} fields, expected {expected}")]
    RaggedRows {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
