use crate::error::{Error, Result};

use super::{DenseMatrix, SYMMETRY_TOL};

/// Lower-triangular factor `T` with strictly positive diagonal, so that
/// `T T^t` is positive definite.
///
/// The same value also carries the unit-diagonal form: `T = L sqrt(D)` with
/// `l_ij = t_ij / t_jj` and `d_jj = t_jj^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerTriangular {
    inner: DenseMatrix,
}

impl LowerTriangular {
    pub fn identity(p: usize) -> Self {
        LowerTriangular {
            inner: DenseMatrix::identity(p),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_dense(DenseMatrix::from_diagonal(diag))
    }

    /// Validates that `m` is square, has an exactly-zero strict upper triangle,
    /// finite entries and a positive diagonal.
    pub fn from_dense(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(
                "square matrix",
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        let p = m.rows();
        for i in 0..p {
            for j in 0..p {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if j > i && v != 0.0 {
                    return Err(Error::InvalidFactor(format!(
                        "entry ({i}, {j}) above the diagonal is {v}"
                    )));
                }
            }
            if m[(i, i)] <= 0.0 {
                return Err(Error::InvalidFactor(format!(
                    "diagonal entry {i} is {} (must be > 0)",
                    m[(i, i)]
                )));
            }
        }
        Ok(LowerTriangular { inner: m })
    }

    /// Callers guarantee the invariants; checked in debug builds.
    pub(crate) fn from_dense_unchecked(m: DenseMatrix) -> Self {
        debug_assert!(Self::from_dense(m.clone()).is_ok(), "{m:?}");
        LowerTriangular { inner: m }
    }

    /// `T = L sqrt(D)` from a unit lower-triangular `L` (only the strict lower
    /// triangle is read) and the diagonal of `D`.
    pub fn from_unit_lower_and_diag(l: &DenseMatrix, d: &[f64]) -> Result<Self> {
        let p = d.len();
        if l.shape() != (p, p) {
            return Err(Error::dims(
                format!("{p}x{p}"),
                format!("{}x{}", l.rows(), l.cols()),
            ));
        }
        let roots: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
        let t = DenseMatrix::from_fn(p, p, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => l[(i, j)] * roots[j],
            std::cmp::Ordering::Equal => roots[i],
            std::cmp::Ordering::Less => 0.0,
        });
        Self::from_dense(t)
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn into_dense(self) -> DenseMatrix {
        self.inner
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.inner.diagonal()
    }

    /// `sum_i ln t_ii`, i.e. half of `ln det(T T^t)`.
    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).ln()).sum()
    }

    /// `T T^t`, using only the lower triangle.
    pub fn gram(&self) -> DenseMatrix {
        let p = self.dim();
        let mut out = DenseMatrix::zeros(p, p);
        for i in 0..p {
            let ri = &self.inner.row(i)[..=i];
            for j in 0..=i {
                let rj = &self.inner.row(j)[..=j];
                let v: f64 = ri[..=j].iter().zip(rj).map(|(a, b)| a * b).sum();
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Splits into unit-diagonal `L` and the diagonal of `D` (`d_jj = t_jj^2`).
    pub fn unit_lower_and_diag(&self) -> (DenseMatrix, Vec<f64>) {
        let p = self.dim();
        let diag = self.diagonal();
        let l = DenseMatrix::from_fn(p, p, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.get(i, j) / diag[j],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        });
        (l, diag.iter().map(|t| t * t).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_dense(self.inner.scaled(c))
    }

    /// Forward substitution for `T y = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let p = self.dim();
        if b.len() != p {
            return Err(Error::dims(format!("vector of length {p}"), b.len()));
        }
        let mut y = b.to_vec();
        forward_in_place(&self.inner, &mut y);
        Ok(y)
    }

    /// Back substitution for `T^t y = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        let p = self.dim();
        if b.len() != p {
            return Err(Error::dims(format!("vector of length {p}"), b.len()));
        }
        let mut y = b.to_vec();
        backward_transpose_in_place(&self.inner, &mut y);
        Ok(y)
    }

    /// `T^{-1} B`, column by column.
    pub fn solve_columns(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.solve_columns_with(b, forward_in_place)
    }

    /// `T^{-t} B`, column by column.
    pub fn solve_transpose_columns(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.solve_columns_with(b, backward_transpose_in_place)
    }

    fn solve_columns_with(
        &self,
        b: &DenseMatrix,
        solve: fn(&DenseMatrix, &mut [f64]),
    ) -> Result<DenseMatrix> {
        let p = self.dim();
        if b.rows() != p {
            return Err(Error::dims(format!("{p} rows"), b.rows()));
        }
        // Work on B^t so each right-hand side is a contiguous row.
        let mut bt = b.transpose();
        for k in 0..bt.rows() {
            let start = k * p;
            solve(&self.inner, &mut bt.as_mut_slice()[start..start + p]);
        }
        Ok(bt.transpose())
    }

    /// Number of strictly-lower entries with `|t_ij| > tol`.
    pub fn strictly_lower_nonzeros(&self, tol: f64) -> usize {
        let p = self.dim();
        (1..p)
            .map(|i| (0..i).filter(|&j| self.get(i, j).abs() > tol).count())
            .sum()
    }
}

fn forward_in_place(t: &DenseMatrix, y: &mut [f64]) {
    for i in 0..y.len() {
        let row = t.row(i);
        let s: f64 = row[..i].iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
        y[i] = (y[i] - s) / row[i];
    }
}

fn backward_transpose_in_place(t: &DenseMatrix, y: &mut [f64]) {
    let p = y.len();
    for i in (0..p).rev() {
        y[i] /= t[(i, i)];
        let yi = y[i];
        // Column i of T^t is row i of T.
        for (yk, &tik) in y[..i].iter_mut().zip(&t.row(i)[..i]) {
            *yk -= tik * yi;
        }
    }
}

/// Cholesky factorization `sigma = T T^t` with the default symmetry tolerance.
pub fn cholesky_decompose(sigma: &DenseMatrix) -> Result<LowerTriangular> {
    cholesky_with_tol(sigma, SYMMETRY_TOL)
}

pub fn cholesky_with_tol(sigma: &DenseMatrix, symmetry_tol: f64) -> Result<LowerTriangular> {
    sigma.check_symmetric(symmetry_tol)?;
    let p = sigma.rows();
    let mut t = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = t.row(i)[..j]
                .iter()
                .zip(&t.row(j)[..j])
                .map(|(a, b)| a * b)
                .sum();
            // Read the lower triangle only.
            let a = sigma[(i, j)];
            if i == j {
                let pivot = a - s;
                if pivot <= 0.0 || !pivot.is_finite() {
                    return Err(Error::NotPositiveDefinite { index: i, pivot });
                }
                t[(i, i)] = pivot.sqrt();
            } else {
                t[(i, j)] = (a - s) / t[(j, j)];
            }
        }
    }
    Ok(LowerTriangular::from_dense_unchecked(t))
}

/// Solves `T y = b` by forward substitution.
pub fn triangular_solve(t: &LowerTriangular, b: &[f64]) -> Result<Vec<f64>> {
    t.solve(b)
}
