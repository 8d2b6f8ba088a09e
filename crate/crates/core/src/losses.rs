//! Smooth matrix losses over `Sigma(T) = T T^t` and their gradients in `T`.
//!
//! Both gradients go through `grad_T phi = 2 grad_Sigma(phi) T`, valid for any
//! loss whose `Sigma`-gradient is symmetric, and keep only the lower triangle
//! because `T` is constrained lower triangular.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LowerTriangular, SYMMETRY_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `ln det(Sigma) + tr(Sigma^{-1} Sigma_hat)`
    Nll,
    /// `||Sigma - Sigma_hat||_F^2`
    #[serde(rename = "fr")]
    Frobenius,
}

/// A loss tied to its reference matrix (a sample covariance or correlation).
#[derive(Clone, Debug)]
pub struct Loss {
    kind: LossKind,
    reference: DenseMatrix,
}

impl Loss {
    pub fn new(kind: LossKind, reference: DenseMatrix) -> Result<Self> {
        reference.check_symmetric(SYMMETRY_TOL)?;
        Ok(Loss { kind, reference })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn reference(&self) -> &DenseMatrix {
        &self.reference
    }

    pub fn dim(&self) -> usize {
        self.reference.rows()
    }

    fn check(&self, t: &LowerTriangular) -> Result<()> {
        if t.dim() != self.dim() {
            return Err(Error::dims(
                format!("{0}x{0} factor", self.dim()),
                format!("{0}x{0}", t.dim()),
            ));
        }
        Ok(())
    }

    pub fn value(&self, t: &LowerTriangular) -> Result<f64> {
        self.check(t)?;
        Ok(match self.kind {
            LossKind::Nll => nll_parts(t, &self.reference).0,
            LossKind::Frobenius => fr_residual(t, &self.reference).sum_of_squares(),
        })
    }

    /// Gradient with respect to the lower-triangular entries of `T` (the
    /// strict upper triangle of the result is zero).
    pub fn gradient(&self, t: &LowerTriangular) -> Result<DenseMatrix> {
        self.check(t)?;
        let mut g = match self.kind {
            LossKind::Nll => {
                // 2 T^{-t} (I - T^{-1} Sigma_hat T^{-t})
                let (_, whitened) = nll_parts(t, &self.reference);
                let inner = DenseMatrix::identity(t.dim()).sub(&whitened)?;
                t.solve_transpose_columns(&inner)?.scaled(2.0)
            }
            LossKind::Frobenius => {
                // grad_Sigma = 2 (Sigma - Sigma_hat), hence 4 (T T^t - Sigma_hat) T
                fr_residual(t, &self.reference)
                    .matmul(t.as_dense())?
                    .scaled(4.0)
            }
        };
        zero_strict_upper(&mut g);
        Ok(g)
    }
}

/// Returns the NLL value and `T^{-1} Sigma_hat T^{-t}`.
fn nll_parts(t: &LowerTriangular, sigma_hat: &DenseMatrix) -> (f64, DenseMatrix) {
    // W = T^{-1} Sigma_hat; then T^{-1} W^t = T^{-1} Sigma_hat T^{-t}.
    let w = t.solve_columns(sigma_hat).expect("dimensions checked");
    let whitened = t.solve_columns(&w.transpose()).expect("dimensions checked");
    (2.0 * t.log_det() + whitened.trace(), whitened)
}

fn fr_residual(t: &LowerTriangular, sigma_hat: &DenseMatrix) -> DenseMatrix {
    t.gram().sub(sigma_hat).expect("dimensions checked")
}

pub(crate) fn zero_strict_upper(m: &mut DenseMatrix) {
    let p = m.rows();
    for i in 0..p {
        for j in i + 1..m.cols() {
            m[(i, j)] = 0.0;
        }
    }
}

/// `ln det(T T^t) + tr((T T^t)^{-1} Sigma_hat)` via triangular solves.
pub fn nll_value(t: &LowerTriangular, sigma_hat: &DenseMatrix) -> Result<f64> {
    Loss::new(LossKind::Nll, sigma_hat.clone())?.value(t)
}

/// `sum_ij (sigma_ij - sigma_hat_ij)^2` with `Sigma = T T^t`.
pub fn fr_value(t: &LowerTriangular, sigma_hat: &DenseMatrix) -> Result<f64> {
    Loss::new(LossKind::Frobenius, sigma_hat.clone())?.value(t)
}

/// Lower-triangular gradient of the chosen loss at `t`.
pub fn grad_t(kind: LossKind, sigma_hat: &DenseMatrix, t: &LowerTriangular) -> Result<DenseMatrix> {
    Loss::new(kind, sigma_hat.clone())?.gradient(t)
}
