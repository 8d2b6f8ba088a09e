//! Sparse Cholesky-factor estimation for covariance matrices.
//!
//! A covariance matrix is parameterized as `Sigma = T T^t` with `T` lower
//! triangular, and zeros in `T` are the model structure. Four estimators are
//! provided:
//!
//! * `mband`: k-banded recursive least squares ([`regression::fit_banded`]),
//! * `mlasso`: recursive lasso over estimated residuals ([`regression::fit_lasso`]),
//! * `mglik` / `mgfrob`: `phi(T T^t) + lambda ||T||_1` minimized by proximal
//!   gradient ([`prox::prox_solve`]) with the Gaussian negative log-likelihood
//!   or the Frobenius loss.
//!
//! Around them sit simulation generators, support metrics and a QDA
//! classifier that scores classes through their fitted factors.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod io;
pub mod linalg;
pub mod losses;
pub mod metrics;
pub mod prox;
pub mod qda;
pub mod regression;
pub mod relations;
pub mod selection;
pub mod simulate;

pub use error::{Error, Result};
pub use estimator::{estimate, EstimatorSpec, Fitted, Method, Tuning};
pub use linalg::{DataSample, DenseMatrix, LowerTriangular};
