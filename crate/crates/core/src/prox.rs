//! Proximal gradient descent with backtracking for
//! `min_T phi(T T^t) + lambda ||T||_1` over lower-triangular `T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_decompose, DenseMatrix, LowerTriangular};
use crate::losses::Loss;

/// Smallest step tried before the line search gives up.
pub const MIN_STEP: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once an accepted step decreases the objective by less than this.
    pub tolerance: f64,
    pub lambda: f64,
    /// Backtracking factor in (0, 1).
    pub backtrack: f64,
    pub initial_step: f64,
    /// Lower bound enforced on every diagonal entry after thresholding.
    pub diag_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 500,
            tolerance: 1e-6,
            lambda: 0.0,
            backtrack: 0.5,
            initial_step: 1.0,
            diag_floor: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_owned()));
        if self.max_iters < 1 {
            return bad("max_iters must be at least 1");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be finite and non-negative");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtracking factor must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return bad("initial step must be positive");
        }
        if !(self.diag_floor > 0.0) {
            return bad("diagonal floor must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub objective: f64,
    pub loss: f64,
    pub penalty: f64,
    pub step: f64,
    pub decrease: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverTrace {
    pub initial_objective: f64,
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
}

impl SolverTrace {
    /// Objective at the start and after every accepted step.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.iterations.iter().map(|r| r.objective))
            .collect()
    }

    pub fn final_objective(&self) -> f64 {
        self.iterations
            .last()
            .map_or(self.initial_objective, |r| r.objective)
    }
}

/// `sign(x) max(|x| - level, 0)`.
#[inline]
pub fn soft_threshold(x: f64, level: f64) -> f64 {
    debug_assert!(level >= 0.0);
    if x > level {
        x - level
    } else if x < -level {
        x + level
    } else {
        0.0
    }
}

/// `||T||_1` over the lower triangle, diagonal included.
pub fn l1_norm(t: &LowerTriangular) -> f64 {
    let p = t.dim();
    (0..p)
        .map(|i| {
            t.as_dense().row(i)[..=i]
                .iter()
                .map(|v| v.abs())
                .sum::<f64>()
        })
        .sum()
}

/// Starting point: the Cholesky factor of `sigma_hat`, jittered by `1e-3 I`
/// when `sigma_hat` is singular.
pub fn default_init(sigma_hat: &DenseMatrix) -> Result<LowerTriangular> {
    match cholesky_decompose(sigma_hat) {
        Ok(t) => Ok(t),
        Err(Error::NotPositiveDefinite { .. }) => {
            match cholesky_decompose(&sigma_hat.with_added_diagonal(1e-3)) {
                Ok(t) => Ok(t),
                // Badly indefinite input (never a sample covariance): start
                // from the diagonal.
                Err(Error::NotPositiveDefinite { .. }) => LowerTriangular::from_diagonal(
                    &sigma_hat
                        .diagonal()
                        .iter()
                        .map(|d| d.max(1e-3).sqrt())
                        .collect::<Vec<_>>(),
                ),
                Err(e) => Err(e),
            }
        }
        Err(e) => Err(e),
    }
}

/// Gradient step, soft-thresholding at `step * lambda`, then the diagonal
/// floor.
fn prox_step(
    t: &LowerTriangular,
    grad: &DenseMatrix,
    step: f64,
    lambda: f64,
    floor: f64,
) -> LowerTriangular {
    let p = t.dim();
    let level = step * lambda;
    let mut out = DenseMatrix::zeros(p, p);
    for i in 0..p {
        let ti = t.as_dense().row(i);
        let gi = grad.row(i);
        for j in 0..=i {
            out[(i, j)] = soft_threshold(ti[j] - step * gi[j], level);
        }
        if !(out[(i, i)] >= floor) {
            out[(i, i)] = floor;
        }
    }
    LowerTriangular::from_dense_unchecked(out)
}

/// Runs the proximal gradient loop from `init`.
///
/// A trial point is accepted when it does not increase `f + g` and satisfies
/// the quadratic upper bound `f' <= f + <T' - T, D> + ||T' - T||_F^2 / (2s)`.
pub fn prox_solve(
    loss: &Loss,
    init: &LowerTriangular,
    config: &SolverConfig,
) -> Result<(LowerTriangular, SolverTrace)> {
    config.validate()?;
    if init.dim() != loss.dim() {
        return Err(Error::dims(
            format!("{0}x{0} initial factor", loss.dim()),
            format!("{0}x{0}", init.dim()),
        ));
    }
    let lambda = config.lambda;
    let mut t = init.clone();
    let mut f = loss.value(&t)?;
    let mut g = lambda * l1_norm(&t);
    let mut trace = SolverTrace {
        initial_objective: f + g,
        iterations: Vec::new(),
        termination: Termination::MaxIters,
    };

    for iteration in 1..=config.max_iters {
        let grad = loss.gradient(&t)?;
        let mut step = config.initial_step;
        let (next, f_next, g_next) = loop {
            let cand = prox_step(&t, &grad, step, lambda, config.diag_floor);
            let f_cand = loss.value(&cand)?;
            if f_cand.is_finite() {
                let g_cand = lambda * l1_norm(&cand);
                let diff = cand.as_dense().sub(t.as_dense())?;
                let bound = diff.sum_of_squares() / (2.0 * step) + diff.dot(&grad)?;
                if f_cand + g_cand <= f + g && f_cand <= f + bound {
                    break (cand, f_cand, g_cand);
                }
            }
            step *= config.backtrack;
            if step < MIN_STEP {
                return Err(Error::LineSearchStall {
                    iteration,
                    min_step: MIN_STEP,
                });
            }
        };
        let decrease = f + g - f_next - g_next;
        t = next;
        f = f_next;
        g = g_next;
        trace.iterations.push(IterationRecord {
            objective: f + g,
            loss: f,
            penalty: g,
            step,
            decrease,
        });
        if decrease < config.tolerance {
            trace.termination = Termination::Converged;
            break;
        }
    }
    Ok((t, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::LossKind;

    #[test]
    fn soft_threshold_examples() {
        assert!((soft_threshold(0.5, 0.2) - 0.3).abs() < 1e-15);
        assert_eq!(soft_threshold(-0.1, 0.2), 0.0);
        assert!((soft_threshold(-0.5, 0.2) + 0.3).abs() < 1e-15);
        for x in [-3.5, -1e-9, 0.0, 2.25, 1e12] {
            assert_eq!(soft_threshold(x, 0.0), x);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let base = SolverConfig::default();
        for bad in [
            SolverConfig {
                backtrack: 1.0,
                ..base
            },
            SolverConfig {
                max_iters: 0,
                ..base
            },
            base.with_lambda(-1.0),
            SolverConfig {
                diag_floor: 0.0,
                ..base
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn minimizer_is_a_fixed_point() {
        let s = DenseMatrix::from_rows(&[
            vec![1.0, 0.4, 0.2],
            vec![0.4, 1.0, 0.4],
            vec![0.2, 0.4, 1.0],
        ])
        .unwrap();
        let init = cholesky_decompose(&s).unwrap();
        let loss = Loss::new(LossKind::Frobenius, s).unwrap();
        let (_, trace) = prox_solve(&loss, &init, &SolverConfig::default()).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert!(trace.iterations.len() <= 2);
        assert!(trace.iterations.last().unwrap().decrease < 1e-6);
    }

    #[test]
    fn mismatched_init_is_rejected() {
        let loss = Loss::new(LossKind::Nll, DenseMatrix::identity(3)).unwrap();
        let err = prox_solve(
            &loss,
            &LowerTriangular::identity(2),
            &SolverConfig::default(),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn singular_reference_gets_jittered_init() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let t = default_init(&s).unwrap();
        assert!(t.diagonal().iter().all(|&d| d > 0.0));
    }
}
