//! Regression identities behind the Cholesky parameterization.

mod common;

use cholcov::linalg::cholesky_decompose;
use cholcov::relations::{
    regression_coefficients, u_from_sigma, verify_appendix_a, verify_proposition1,
};
use cholcov::simulate::sample_gaussian;
use cholcov::DenseMatrix;
use common::{from_na, random_factor, random_spd, rng, to_na};
use nalgebra::DMatrix;

fn suite() -> Vec<DenseMatrix> {
    let mut r = rng(21);
    (0..100).map(|k| random_spd(2 + k % 9, &mut r)).collect()
}

#[test]
fn cholesky_entries_are_prefix_regression_coefficients() {
    for sigma in suite() {
        let dev = verify_proposition1(&sigma).unwrap();
        assert!(dev <= 1e-10, "p = {}: {dev:e}", sigma.rows());
    }
}

#[test]
fn coefficient_recursion_holds_on_random_matrices() {
    for sigma in suite() {
        let dev = verify_appendix_a(&sigma).unwrap();
        assert!(dev <= 1e-10, "p = {}: {dev:e}", sigma.rows());
    }
}

#[test]
fn unit_factor_is_inverse_transpose_of_regression_u() {
    for sigma in suite() {
        let (l, _) = cholesky_decompose(&sigma).unwrap().unit_lower_and_diag();
        let (u, d) = u_from_sigma(&sigma).unwrap();
        let u_inv_t = from_na(&to_na(&u).try_inverse().unwrap().transpose());
        let dev = l.max_abs_diff(&u_inv_t).unwrap();
        assert!(dev <= 1e-9, "{dev:e}");

        let precision = to_na(&sigma).try_inverse().unwrap();
        let rebuilt = to_na(&u)
            * DMatrix::from_diagonal(&d.iter().map(|v| 1.0 / v).collect::<Vec<_>>().into())
            * to_na(&u).transpose();
        let rel = (rebuilt - &precision).norm() / precision.norm();
        assert!(rel <= 1e-9, "{rel:e}");
    }
}

#[test]
fn coefficients_match_least_squares_on_a_large_sample() {
    let mut r = rng(22);
    let t = random_factor(6, &mut r);
    let sigma = t.gram();
    let data = sample_gaussian(&t, 100_000, &mut r).unwrap();
    let x = to_na(data.values());
    for (i, set) in [(5usize, vec![0, 1, 2, 3, 4]), (3, vec![0, 1]), (4, vec![2])] {
        let design = x.select_columns(&set);
        let y = x.column(i).into_owned();
        let gram = design.transpose() * &design;
        let fitted = gram.lu().solve(&(design.transpose() * y)).unwrap();
        let beta = regression_coefficients(&sigma, i, &set).unwrap();
        for (b, f) in beta.iter().zip(fitted.iter()) {
            assert!((b - f).abs() <= 0.02, "i = {i}: {b} vs {f}");
        }
    }
}
