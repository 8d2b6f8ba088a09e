//! Cross-validation plumbing shared by the hyperparameter selectors.

use crate::error::{Error, Result};
use crate::linalg::{sample_covariance, Centering, DataSample, LowerTriangular};
use crate::losses::{nll_value, Loss, LossKind};
use crate::prox::{default_init, prox_solve, SolverConfig};

pub const DEFAULT_FOLDS: usize = 5;
pub const GRID_POINTS: usize = 20;
/// Smallest grid value as a fraction of the largest.
pub const GRID_RATIO: f64 = 1e-2;

/// Interleaved folds: row `r` is held out in fold `r % folds`.
pub fn fold_splits(n: usize, folds: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if n < folds {
        return Err(Error::InvalidConfig(format!(
            "{n} observations cannot fill {folds} folds"
        )));
    }
    Ok((0..folds)
        .map(|f| (0..n).partition(|r| r % folds != f))
        .collect())
}

/// `points` values from `max` down to `max * ratio`, evenly spaced in log.
pub fn log_grid(max: f64, ratio: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![max],
        _ => (0..points)
            .map(|i| max * ratio.powf(i as f64 / (points - 1) as f64))
            .collect(),
    }
}

/// Validated copy of a user grid, sorted descending.
pub fn descending(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty hyperparameter grid".into()));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidConfig(
            "grid values must be finite and non-negative".into(),
        ));
    }
    let mut g = grid.to_vec();
    g.sort_by(|a, b| b.total_cmp(a));
    g.dedup();
    Ok(g)
}

/// NLL of a fitted factor against the held-out rows' second-moment matrix.
pub fn heldout_nll(t: &LowerTriangular, test: &DataSample) -> Result<f64> {
    nll_value(t, &sample_covariance(test, Centering::Zero))
}

/// Largest strictly-lower gradient entry at the diagonal fit
/// `T0 = diag(sqrt(sigma_hat_ii))`: the penalty level above which
/// thresholding removes every off-diagonal entry from that point.
pub fn prox_lambda_max(loss: &Loss) -> Result<f64> {
    let diag: Vec<f64> = loss
        .reference()
        .diagonal()
        .iter()
        .map(|d| d.max(1e-8).sqrt())
        .collect();
    let t0 = LowerTriangular::from_diagonal(&diag)?;
    let g = loss.gradient(&t0)?;
    let p = loss.dim();
    let mut best: f64 = 0.0;
    for i in 1..p {
        for j in 0..i {
            best = best.max(g[(i, j)].abs());
        }
    }
    Ok(best)
}

/// Result of a penalty-path cross-validation.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSelection {
    pub lambda: f64,
    pub index: usize,
    /// `(lambda, mean held-out NLL)` along the path.
    pub scores: Vec<(f64, f64)>,
}

/// Selects the prox-solver penalty by held-out NLL over a descending log
/// grid.
///
/// Every grid value is solved from the same start, `default_init` of the
/// training covariance. Warm starts along the path are not used: with the
/// Frobenius loss a large penalty can pin diagonal entries at the floor, and
/// that state would then be carried to every smaller penalty.
pub fn select_prox_lambda(
    data: &DataSample,
    kind: LossKind,
    folds: usize,
    base: &SolverConfig,
    grid: Option<&[f64]>,
) -> Result<LambdaSelection> {
    let grid = match grid {
        Some(g) => descending(g)?,
        None => {
            let full = Loss::new(kind, sample_covariance(data, Centering::Zero))?;
            let lmax = prox_lambda_max(&full)?.max(f64::MIN_POSITIVE);
            log_grid(lmax, GRID_RATIO, GRID_POINTS)
        }
    };
    let splits = fold_splits(data.n(), folds)?;
    let mut scores = vec![0.0; grid.len()];
    for (train_rows, test_rows) in &splits {
        let train = data.select_rows(train_rows)?;
        let test = data.select_rows(test_rows)?;
        let loss = Loss::new(kind, sample_covariance(&train, Centering::Zero))?;
        let init = default_init(loss.reference())?;
        for (score, &lambda) in scores.iter_mut().zip(&grid) {
            let t = prox_solve(&loss, &init, &base.with_lambda(lambda))?.0;
            *score += heldout_nll(&t, &test)? / folds as f64;
        }
    }
    let index = crate::regression::argmin_first(&scores);
    Ok(LambdaSelection {
        lambda: grid[index],
        index,
        scores: grid.into_iter().zip(scores).collect(),
    })
}
