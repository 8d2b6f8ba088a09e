use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cholcov::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid TOML config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("writing JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{method}: {source}")]
    Method {
        method: String,
        #[source]
        source: cholcov::Error,
    },

    #[error("{failed} of {total} oracle checks exceeded the tolerance")]
    VerificationFailed { failed: usize, total: usize },
}

impl CliError {
    /// Short machine-readable tag for the structured error line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(cholcov::Error::InvalidConfig(_)) => "config",
            CliError::Core(cholcov::Error::Io { .. }) => "io",
            CliError::Core(
                cholcov::Error::Parse { .. }
                | cholcov::Error::RaggedRows { .. }
                | cholcov::Error::EmptySample,
            ) => "input",
            CliError::Core(_) | CliError::Method { .. } => "estimation",
            CliError::Config(_) | CliError::Toml(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Csv(_) | CliError::Json(_) => "output",
            CliError::VerificationFailed { .. } => "verification",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
