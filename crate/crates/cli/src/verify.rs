//! The `verify` subcommand: regression identities of the Cholesky factor on
//! random positive definite matrices.

use serde::Serialize;

use cholcov::relations::{verify_appendix_a, verify_proposition1};
use cholcov::simulate::{random_sparse_cholesky, rng_from_seed};
use cholcov::DenseMatrix;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub case: usize,
    pub p: usize,
    pub coefficient_identity: f64,
    pub recursion_identity: f64,
}

/// Random PD matrix `T T^t` with a fully dense random factor.
pub fn random_pd(p: usize, seed: u64) -> DenseMatrix {
    random_sparse_cholesky(p, 1.0, &mut rng_from_seed(seed)).gram()
}

/// Runs both checks on `count` matrices with `p` cycling over `2..=p_max`.
pub fn run_verify(count: usize, p_max: usize, seed: u64) -> Result<Vec<VerifyRow>> {
    let p_max = p_max.max(2);
    (0..count)
        .map(|case| {
            let p = 2 + case % (p_max - 1);
            let sigma = random_pd(p, seed.wrapping_add(case as u64));
            Ok(VerifyRow {
                case,
                p,
                coefficient_identity: verify_proposition1(&sigma)?,
                recursion_identity: verify_appendix_a(&sigma)?,
            })
        })
        .collect()
}
