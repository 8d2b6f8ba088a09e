//! Regression-based factor estimators: k-banded recursive least squares and
//! recursive lasso over the estimated residuals.
//!
//! Both walk the variables in order. Row `i` of the unit-diagonal `L` comes
//! from regressing `x_i` on earlier residuals `eps_j`, the new residual is
//! `eps_i = x_i - E l_i`, and `d_ii = ||eps_i||^2 / N`. The factor is
//! `T = L sqrt(D)`. Data are used as given (no centering).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DataSample, DenseMatrix, LowerTriangular};
use crate::prox::soft_threshold;
use crate::selection::{descending, fold_splits, heldout_nll, log_grid, GRID_POINTS, GRID_RATIO};

/// Residual variances at or below this are treated as degenerate: the
/// residual is dropped from later designs and `d_ii` is floored here.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandConfig {
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LassoConfig {
    pub lambda: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            lambda: 0.0,
            tolerance: 1e-8,
            max_sweeps: 10_000,
        }
    }
}

impl LassoConfig {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig(
                "lasso lambda must be finite and >= 0".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(
                "lasso tolerance must be positive".into(),
            ));
        }
        if self.max_sweeps < 1 {
            return Err(Error::InvalidConfig(
                "lasso max_sweeps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn columns(data: &DataSample) -> Vec<Vec<f64>> {
    (0..data.p()).map(|j| data.values().column(j)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// State of the recursive residual construction.
struct Recursion {
    n: f64,
    residuals: Vec<Vec<f64>>,
    usable: Vec<bool>,
    l: DenseMatrix,
    d: Vec<f64>,
}

impl Recursion {
    fn new(n: usize, p: usize) -> Self {
        Recursion {
            n: n as f64,
            residuals: Vec::with_capacity(p),
            usable: Vec::with_capacity(p),
            l: DenseMatrix::identity(p),
            d: Vec::with_capacity(p),
        }
    }

    /// Records row `i` from its coefficients over `design` (indices of
    /// earlier residuals) and stores the new residual.
    fn push_row(&mut self, x: &[f64], design: &[usize], coef: &[f64]) {
        let i = self.residuals.len();
        let mut eps = x.to_vec();
        for (&j, &c) in design.iter().zip(coef) {
            self.l[(i, j)] = c;
            if c != 0.0 {
                for (e, r) in eps.iter_mut().zip(&self.residuals[j]) {
                    *e -= c * r;
                }
            }
        }
        let var = dot(&eps, &eps) / self.n;
        let usable = var > RESIDUAL_FLOOR;
        self.d.push(if usable { var } else { RESIDUAL_FLOOR });
        self.usable.push(usable);
        self.residuals.push(eps);
    }

    fn finish(self) -> Result<LowerTriangular> {
        LowerTriangular::from_unit_lower_and_diag(&self.l, &self.d)
    }
}

/// Solves the SPD system `g x = c` (row-major `m x m`), or `None` when a
/// pivot is not positive relative to its diagonal entry.
fn solve_spd(g: &[f64], c: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut f = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| f[i * m + k] * f[j * m + k]).sum();
            if i == j {
                let pivot = g[i * m + i] - s;
                if !(pivot > 1e-12 * g[i * m + i].abs()) || !(pivot > 0.0) {
                    return None;
                }
                f[i * m + i] = pivot.sqrt();
            } else {
                f[i * m + j] = (g[i * m + j] - s) / f[j * m + j];
            }
        }
    }
    let mut y = c.to_vec();
    for i in 0..m {
        let s: f64 = (0..i).map(|k| f[i * m + k] * y[k]).sum();
        y[i] = (y[i] - s) / f[i * m + i];
    }
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|k| f[k * m + i] * y[k]).sum();
        y[i] = (y[i] - s) / f[i * m + i];
    }
    Some(y)
}

/// Largest admissible band for `n` observations of `p` variables, plus one.
pub fn band_limit(n: usize, p: usize) -> usize {
    n.saturating_sub(1).min(p)
}

/// k-banded recursive least squares: row `i` of `L` regresses `x_i` on the
/// residuals `eps_{max(0, i-k)} .. eps_{i-1}`.
pub fn fit_banded(data: &DataSample, config: &BandConfig) -> Result<LowerTriangular> {
    let (n, p) = (data.n(), data.p());
    let limit = band_limit(n, p);
    if config.k >= limit {
        return Err(Error::BandTooLarge { k: config.k, limit });
    }
    let xs = columns(data);
    let mut rec = Recursion::new(n, p);
    for (i, x) in xs.iter().enumerate() {
        let design: Vec<usize> = (i.saturating_sub(config.k)..i)
            .filter(|&j| rec.usable[j])
            .collect();
        let m = design.len();
        let mut gram = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for (a, &ja) in design.iter().enumerate() {
            rhs[a] = dot(&rec.residuals[ja], x);
            for (b, &jb) in design.iter().enumerate().take(a + 1) {
                let v = dot(&rec.residuals[ja], &rec.residuals[jb]);
                gram[a * m + b] = v;
                gram[b * m + a] = v;
            }
        }
        let coef = solve_spd(&gram, &rhs, m).ok_or(Error::SingularDesign { row: i })?;
        rec.push_row(x, &design, &coef);
    }
    rec.finish()
}

/// Recursive lasso: row `i` minimizes
/// `(1/N) ||x_i - E l_i||^2 + lambda ||l_i||_1` over all earlier residuals by
/// cyclic coordinate descent with covariance updates.
pub fn fit_lasso(data: &DataSample, config: &LassoConfig) -> Result<LowerTriangular> {
    fit_lasso_warm(data, config, None)
}

/// As [`fit_lasso`], starting each row's coordinate descent from the
/// corresponding row of `warm` (a unit lower-triangular `L`) when given.
pub(crate) fn fit_lasso_warm(
    data: &DataSample,
    config: &LassoConfig,
    warm: Option<&DenseMatrix>,
) -> Result<LowerTriangular> {
    config.validate()?;
    let (n, p) = (data.n(), data.p());
    if n < 2 {
        return Err(Error::InvalidConfig(
            "lasso needs at least 2 observations".into(),
        ));
    }
    let inv_n = 1.0 / n as f64;
    let xs = columns(data);
    let mut rec = Recursion::new(n, p);
    for (i, x) in xs.iter().enumerate() {
        let design: Vec<usize> = (0..i).filter(|&j| rec.usable[j]).collect();
        let m = design.len();
        let mut gram = vec![0.0; m * m];
        let mut corr = vec![0.0; m];
        for (a, &ja) in design.iter().enumerate() {
            corr[a] = dot(&rec.residuals[ja], x) * inv_n;
            for (b, &jb) in design.iter().enumerate().take(a + 1) {
                let v = dot(&rec.residuals[ja], &rec.residuals[jb]) * inv_n;
                gram[a * m + b] = v;
                gram[b * m + a] = v;
            }
        }
        let start: Vec<f64> = match warm {
            Some(w) => design.iter().map(|&j| w[(i, j)]).collect(),
            None => vec![0.0; m],
        };
        let coef = coordinate_descent(&gram, &corr, m, start, config).ok_or(
            Error::ConvergenceFailure {
                row: i,
                sweeps: config.max_sweeps,
            },
        )?;
        rec.push_row(x, &design, &coef);
    }
    rec.finish()
}

/// Minimizes `l^t G l - 2 c^t l + lambda ||l||_1`. Stops when a full sweep
/// moves no coefficient by `tolerance` or more and the KKT conditions hold
/// to `tolerance`.
fn coordinate_descent(
    gram: &[f64],
    corr: &[f64],
    m: usize,
    mut coef: Vec<f64>,
    config: &LassoConfig,
) -> Option<Vec<f64>> {
    if m == 0 {
        return Some(coef);
    }
    let half_lambda = 0.5 * config.lambda;
    // resid = c - G l
    let mut resid = corr.to_vec();
    for (j, &cj) in coef.iter().enumerate() {
        if cj != 0.0 {
            for (r, g) in resid.iter_mut().zip(&gram[j * m..(j + 1) * m]) {
                *r -= g * cj;
            }
        }
    }
    for _ in 0..config.max_sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..m {
            let gjj = gram[j * m + j];
            let old = coef[j];
            let new = soft_threshold(resid[j] + gjj * old, half_lambda) / gjj;
            let delta = new - old;
            if delta != 0.0 {
                coef[j] = new;
                for (r, g) in resid.iter_mut().zip(&gram[j * m..(j + 1) * m]) {
                    *r -= g * delta;
                }
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < config.tolerance
            && kkt_violation(&coef, &resid, config.lambda) <= config.tolerance
        {
            return Some(coef);
        }
    }
    None
}

/// Largest violation of the lasso optimality conditions, where the smooth
/// gradient is `-2 resid`.
fn kkt_violation(coef: &[f64], resid: &[f64], lambda: f64) -> f64 {
    coef.iter()
        .zip(resid)
        .map(|(&b, &r)| {
            let grad = -2.0 * r;
            if b != 0.0 {
                (grad + lambda * b.signum()).abs()
            } else {
                (grad.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest lambda at which the recursive lasso zeroes every coefficient:
/// with all `l = 0` the residuals are the raw columns, so this is
/// `2 max_{i > j} |x_i . x_j| / N`.
pub fn lasso_lambda_max(data: &DataSample) -> f64 {
    let xs = columns(data);
    let n = data.n() as f64;
    let mut best: f64 = 0.0;
    for i in 1..xs.len() {
        for j in 0..i {
            best = best.max(2.0 * dot(&xs[i], &xs[j]).abs() / n);
        }
    }
    best
}

/// Picks the band `k` minimizing the mean held-out NLL over `folds`
/// interleaved folds. Ties go to the smaller `k`.
pub fn select_band_k(data: &DataSample, folds: usize) -> Result<usize> {
    Ok(band_cv_scores(data, folds, None)?.0)
}

/// Selected k and `(k, mean held-out NLL)` for each candidate. Candidates
/// default to every admissible `k` for the smallest training fold; explicit
/// candidates outside that range are skipped.
pub fn band_cv_scores(
    data: &DataSample,
    folds: usize,
    candidates: Option<&[usize]>,
) -> Result<(usize, Vec<(usize, f64)>)> {
    let splits = fold_splits(data.n(), folds)?;
    let smallest_train = splits.iter().map(|(tr, _)| tr.len()).min().unwrap_or(0);
    let limit = band_limit(smallest_train, data.p());
    let ks: Vec<usize> = match candidates {
        Some(c) => {
            let mut ks: Vec<usize> = c.iter().copied().filter(|&k| k < limit).collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        }
        None => (0..limit).collect(),
    };
    if ks.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no candidate band below the fold limit {limit}"
        )));
    }
    let mut scores = vec![0.0; ks.len()];
    for (train_rows, test_rows) in &splits {
        let train = data.select_rows(train_rows)?;
        let test = data.select_rows(test_rows)?;
        for (&k, score) in ks.iter().zip(scores.iter_mut()) {
            let t = fit_banded(&train, &BandConfig { k })?;
            *score += heldout_nll(&t, &test)? / folds as f64;
        }
    }
    let best = argmin_first(&scores);
    Ok((ks[best], ks.into_iter().zip(scores).collect()))
}

/// Picks lambda for the recursive lasso by held-out NLL. The default grid is
/// log-spaced downward from [`lasso_lambda_max`]; an explicit grid is sorted
/// descending. Ties go to the larger lambda.
pub fn select_lasso_lambda(
    data: &DataSample,
    folds: usize,
    base: &LassoConfig,
    grid: Option<&[f64]>,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let grid = match grid {
        Some(g) => descending(g)?,
        None => {
            let lmax = lasso_lambda_max(data).max(f64::MIN_POSITIVE);
            log_grid(lmax, GRID_RATIO, GRID_POINTS)
        }
    };
    let splits = fold_splits(data.n(), folds)?;
    let mut scores = vec![0.0; grid.len()];
    for (train_rows, test_rows) in &splits {
        let train = data.select_rows(train_rows)?;
        let test = data.select_rows(test_rows)?;
        let mut warm: Option<DenseMatrix> = None;
        for (score, &lambda) in scores.iter_mut().zip(&grid) {
            let t = fit_lasso_warm(&train, &base.with_lambda(lambda), warm.as_ref())?;
            *score += heldout_nll(&t, &test)? / folds as f64;
            warm = Some(t.unit_lower_and_diag().0);
        }
    }
    let best = argmin_first(&scores);
    Ok((grid[best], grid.into_iter().zip(scores).collect()))
}

/// Index of the first minimum; non-finite scores never win.
pub(crate) fn argmin_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] || !scores[best].is_finite() && s.is_finite() {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cholesky_decompose, sample_covariance, Centering};

    fn sample() -> DataSample {
        DataSample::from_rows(&[
            vec![1.0, 2.0, 0.5],
            vec![-0.5, 0.3, 1.0],
            vec![2.0, 1.0, -1.0],
            vec![0.1, -1.2, 0.4],
            vec![-1.3, 0.4, 0.9],
            vec![0.7, 0.8, -0.2],
        ])
        .unwrap()
    }

    #[test]
    fn band_zero_is_diagonal_second_moments() {
        let d = sample();
        let t = fit_banded(&d, &BandConfig { k: 0 }).unwrap();
        for j in 0..3 {
            let col = d.values().column(j);
            let m2 = col.iter().map(|v| v * v).sum::<f64>() / 6.0;
            assert!((t.get(j, j) - m2.sqrt()).abs() < 1e-14);
        }
        assert_eq!(t.strictly_lower_nonzeros(0.0), 0);
    }

    #[test]
    fn full_band_is_cholesky_of_second_moment() {
        let d = sample();
        let t = fit_banded(&d, &BandConfig { k: 2 }).unwrap();
        let c = cholesky_decompose(&sample_covariance(&d, Centering::Zero)).unwrap();
        assert!(t.as_dense().max_abs_diff(c.as_dense()).unwrap() < 1e-12);
    }

    #[test]
    fn band_limit_is_enforced() {
        let d = sample();
        assert!(matches!(
            fit_banded(&d, &BandConfig { k: 3 }),
            Err(Error::BandTooLarge { k: 3, limit: 3 })
        ));
    }

    #[test]
    fn band_is_structural() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                (0..6)
                    .map(|j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * j as f64)
                    .collect()
            })
            .collect();
        let d = DataSample::from_rows(&rows).unwrap();
        let t = fit_banded(&d, &BandConfig { k: 2 }).unwrap();
        for i in 0..6 {
            for j in 0..i {
                if i - j > 2 {
                    assert_eq!(t.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn huge_lambda_gives_diagonal_factor() {
        let d = sample();
        let lam = lasso_lambda_max(&d) * 1.0001;
        let t = fit_lasso(&d, &LassoConfig::default().with_lambda(lam)).unwrap();
        assert_eq!(t.strictly_lower_nonzeros(0.0), 0);
    }

    #[test]
    fn lasso_without_penalty_matches_full_band() {
        let d = sample();
        let a = fit_lasso(&d, &LassoConfig::default()).unwrap();
        let b = fit_banded(&d, &BandConfig { k: 2 }).unwrap();
        assert!(a.as_dense().max_abs_diff(b.as_dense()).unwrap() < 1e-9);
    }

    #[test]
    fn coordinate_descent_reports_non_convergence() {
        let d = sample();
        let cfg = LassoConfig {
            lambda: 0.01,
            tolerance: 1e-300,
            max_sweeps: 1,
        };
        assert!(matches!(
            fit_lasso(&d, &cfg),
            Err(Error::ConvergenceFailure { .. })
        ));
    }

    #[test]
    fn one_fold_is_rejected() {
        assert!(matches!(
            select_band_k(&sample(), 1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn duplicated_column_is_dropped_from_later_designs() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let a = (i as f64 * 0.7).sin();
                vec![a, a, (i as f64).cos()]
            })
            .collect();
        let d = DataSample::from_rows(&rows).unwrap();
        let t = fit_banded(&d, &BandConfig { k: 2 }).unwrap();
        assert!((t.get(1, 1) - RESIDUAL_FLOOR.sqrt()).abs() < 1e-9);
        assert_eq!(t.get(2, 1), 0.0);
        assert!(t.diagonal().iter().all(|&v| v > 0.0));
    }
}
