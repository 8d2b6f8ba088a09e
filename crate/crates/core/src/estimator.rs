//! One entry point over the four factor estimators, with hyperparameter
//! selection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sample_covariance, Centering, DataSample, LowerTriangular};
use crate::losses::{Loss, LossKind};
use crate::prox::{default_init, prox_solve, SolverConfig};
use crate::regression::{
    band_cv_scores, fit_banded, fit_lasso, select_lasso_lambda, BandConfig, LassoConfig,
};
use crate::selection::{select_prox_lambda, DEFAULT_FOLDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// k-banded recursive least squares.
    #[serde(rename = "mband")]
    Band,
    /// Recursive lasso over estimated residuals.
    #[serde(rename = "mlasso")]
    Lasso,
    /// Penalized negative log-likelihood, proximal gradient.
    #[serde(rename = "mglik")]
    ProxNll,
    /// Penalized Frobenius loss, proximal gradient.
    #[serde(rename = "mgfrob")]
    ProxFr,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Band, Method::Lasso, Method::ProxNll, Method::ProxFr];

    pub fn name(self) -> &'static str {
        match self {
            Method::Band => "mband",
            Method::Lasso => "mlasso",
            Method::ProxNll => "mglik",
            Method::ProxFr => "mgfrob",
        }
    }

    pub fn loss_kind(self) -> Option<LossKind> {
        match self {
            Method::ProxNll => Some(LossKind::Nll),
            Method::ProxFr => Some(LossKind::Frobenius),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mband" | "band" | "banded" => Ok(Method::Band),
            "mlasso" | "lasso" => Ok(Method::Lasso),
            "mglik" | "prox_nll" | "nll" => Ok(Method::ProxNll),
            "mgfrob" | "prox_fr" | "fr" => Ok(Method::ProxFr),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// How the method's hyperparameter (band `k` or penalty `lambda`) is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tuning {
    /// Use this value (cast to an integer band for `Method::Band`).
    Fixed(f64),
    /// Minimize held-out NLL over `folds` folds. `grid` overrides the default
    /// candidates (all admissible `k`, or a 20-point log grid for `lambda`).
    CrossValidate {
        folds: usize,
        grid: Option<Vec<f64>>,
    },
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning::CrossValidate {
            folds: DEFAULT_FOLDS,
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub method: Method,
    pub tuning: Tuning,
    pub solver: SolverConfig,
    pub lasso: LassoConfig,
}

impl EstimatorSpec {
    pub fn new(method: Method) -> Self {
        EstimatorSpec {
            method,
            tuning: Tuning::default(),
            solver: SolverConfig::default(),
            lasso: LassoConfig::default(),
        }
    }

    pub fn fixed(method: Method, value: f64) -> Self {
        EstimatorSpec {
            tuning: Tuning::Fixed(value),
            ..Self::new(method)
        }
    }
}

/// A fitted factor and the hyperparameter it was fitted with.
#[derive(Clone, Debug, PartialEq)]
pub struct Fitted {
    pub factor: LowerTriangular,
    pub hyperparameter: f64,
}

fn band_from(value: f64) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value < usize::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(Error::InvalidConfig(format!(
            "band k must be a non-negative integer, got {value}"
        )))
    }
}

/// Fits `spec.method` to `data` (used as given: callers center or
/// standardize beforehand).
pub fn estimate(data: &DataSample, spec: &EstimatorSpec) -> Result<Fitted> {
    match (spec.method, &spec.tuning) {
        (Method::Band, Tuning::Fixed(k)) => {
            let k = band_from(*k)?;
            Ok(Fitted {
                factor: fit_banded(data, &BandConfig { k })?,
                hyperparameter: k as f64,
            })
        }
        (Method::Band, Tuning::CrossValidate { folds, grid }) => {
            let candidates = grid
                .as_ref()
                .map(|g| g.iter().map(|&v| band_from(v)).collect::<Result<Vec<_>>>())
                .transpose()?;
            let (k, _) = band_cv_scores(data, *folds, candidates.as_deref())?;
            Ok(Fitted {
                factor: fit_banded(data, &BandConfig { k })?,
                hyperparameter: k as f64,
            })
        }
        (Method::Lasso, Tuning::Fixed(lambda)) => Ok(Fitted {
            factor: fit_lasso(data, &spec.lasso.with_lambda(*lambda))?,
            hyperparameter: *lambda,
        }),
        (Method::Lasso, Tuning::CrossValidate { folds, grid }) => {
            let (lambda, _) = select_lasso_lambda(data, *folds, &spec.lasso, grid.as_deref())?;
            Ok(Fitted {
                factor: fit_lasso(data, &spec.lasso.with_lambda(lambda))?,
                hyperparameter: lambda,
            })
        }
        (Method::ProxNll | Method::ProxFr, tuning) => {
            let kind = spec.method.loss_kind().expect("prox method");
            let loss = Loss::new(kind, sample_covariance(data, Centering::Zero))?;
            let lambda = match tuning {
                Tuning::Fixed(lambda) => *lambda,
                Tuning::CrossValidate { folds, grid } => {
                    select_prox_lambda(data, kind, *folds, &spec.solver, grid.as_deref())?.lambda
                }
            };
            let init = default_init(loss.reference())?;
            let (factor, _) = prox_solve(&loss, &init, &spec.solver.with_lambda(lambda))?;
            Ok(Fitted {
                factor,
                hyperparameter: lambda,
            })
        }
    }
}
