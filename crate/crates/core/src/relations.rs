//! Regression reading of the Cholesky factor.
//!
//! With `Sigma = L D L^t` (unit-diagonal `L`), entry `l_ij` equals the
//! coefficient of `X_j` when `X_i` is regressed on `X_1 .. X_j`, and
//! `U = L^{-t}` holds the negated coefficients of each variable regressed on
//! all of its predecessors. The helpers here compute the regression side
//! directly from `Sigma` (Gaussian elimination on the normal equations, not
//! Cholesky) so that the two sides can be checked against each other.
//!
//! Indices are 0-based: the prefix set `{1, .., j}` in the usual 1-based
//! notation is `0..j` here.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_decompose, DenseMatrix};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve_general(mut a: DenseMatrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[(r, col)].abs().total_cmp(&a[(s, col)].abs()))
            .expect("non-empty range");
        let pivot = a[(pivot_row, col)];
        if pivot == 0.0 {
            return Err(Error::NotPositiveDefinite { index: col, pivot });
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(pivot_row, c)];
                a[(pivot_row, c)] = tmp;
            }
            b.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = a[(r, col)] / pivot;
            if factor != 0.0 {
                for c in col..n {
                    a[(r, c)] -= factor * a[(col, c)];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[(r, c)] * b[c]).sum();
        b[r] = (b[r] - s) / a[(r, r)];
    }
    Ok(b)
}

fn check_pd(sigma: &DenseMatrix) -> Result<()> {
    cholesky_decompose(sigma).map(|_| ())
}

fn coefficients_unchecked(sigma: &DenseMatrix, i: usize, set: &[usize]) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Ok(vec![]);
    }
    let m = set.len();
    let sub = DenseMatrix::from_fn(m, m, |a, b| sigma[(set[a], set[b])]);
    let rhs: Vec<f64> = set.iter().map(|&j| sigma[(j, i)]).collect();
    solve_general(sub, rhs)
}

/// `beta_{i|J} = (Sigma_iJ Sigma_JJ^{-1})^t`: coefficients of `X_i` regressed
/// on `X_J`, in the order of `set`.
pub fn regression_coefficients(sigma: &DenseMatrix, i: usize, set: &[usize]) -> Result<Vec<f64>> {
    let p = sigma.rows();
    if i >= p || set.iter().any(|&j| j >= p) {
        return Err(Error::dims(
            format!("indices below {p}"),
            format!("i = {i}, J = {set:?}"),
        ));
    }
    if set.contains(&i) {
        return Err(Error::InvalidConfig(format!(
            "response {i} is in the regressor set"
        )));
    }
    check_pd(sigma)?;
    coefficients_unchecked(sigma, i, set)
}

/// Prefix regression coefficient `beta_{ij | 0..=upto}` (coefficient of
/// `X_j`), for `j <= upto < i`.
fn prefix_coef(sigma: &DenseMatrix, i: usize, j: usize, upto: usize) -> Result<f64> {
    let set: Vec<usize> = (0..=upto).collect();
    Ok(coefficients_unchecked(sigma, i, &set)?[j])
}

/// Largest `|l_ij - beta_{ij | 0..=j}|` over `i > j`, with `L` the
/// unit-diagonal Cholesky factor of `sigma`.
pub fn verify_proposition1(sigma: &DenseMatrix) -> Result<f64> {
    let (l, _) = cholesky_decompose(sigma)?.unit_lower_and_diag();
    let p = sigma.rows();
    let mut worst: f64 = 0.0;
    for j in 0..p {
        let set: Vec<usize> = (0..=j).collect();
        for i in j + 1..p {
            let beta = coefficients_unchecked(sigma, i, &set)?[j];
            worst = worst.max((l[(i, j)] - beta).abs());
        }
    }
    Ok(worst)
}

/// Unit upper-triangular `U` and diagonal `D` with `U D^{-1} U^t = Sigma^{-1}`,
/// built from regressions: column `i` of `U` holds `-beta_{i | 0..i}` and
/// `d_i` is the residual variance of that regression.
pub fn u_from_sigma(sigma: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    check_pd(sigma)?;
    let p = sigma.rows();
    let mut u = DenseMatrix::identity(p);
    let mut d = Vec::with_capacity(p);
    for i in 0..p {
        let set: Vec<usize> = (0..i).collect();
        let beta = coefficients_unchecked(sigma, i, &set)?;
        let explained: f64 = set.iter().zip(&beta).map(|(&j, b)| sigma[(i, j)] * b).sum();
        for (&j, b) in set.iter().zip(&beta) {
            u[(j, i)] = -b;
        }
        d.push(sigma[(i, i)] - explained);
    }
    Ok((u, d))
}

/// Largest deviation in the identity
/// `beta_{ij|..j} = beta_{ij|..i-1} + sum_{j<k<i} beta_{ik|..i-1} beta_{kj|..j}`
/// over all `i > j`.
pub fn verify_appendix_a(sigma: &DenseMatrix) -> Result<f64> {
    check_pd(sigma)?;
    let p = sigma.rows();
    let mut worst: f64 = 0.0;
    for i in 1..p {
        let full: Vec<usize> = (0..i).collect();
        let beta_full = coefficients_unchecked(sigma, i, &full)?;
        for j in 0..i {
            let lhs = prefix_coef(sigma, i, j, j)?;
            let mut rhs = beta_full[j];
            for (k, b) in beta_full.iter().enumerate().skip(j + 1) {
                rhs += b * prefix_coef(sigma, k, j, j)?;
            }
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}
