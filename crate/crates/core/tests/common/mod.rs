#![allow(dead_code)]

use cholcov::simulate::SimRng;
use cholcov::{DenseMatrix, LowerTriangular};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Lower-triangular factor with diagonal in [0.5, 1.5] and off-diagonal
/// entries in [-0.5, 0.5].
pub fn random_factor(p: usize, rng: &mut SimRng) -> LowerTriangular {
    let mut m = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..i {
            m[(i, j)] = rng.random_range(-0.5..0.5);
        }
        m[(i, i)] = rng.random_range(0.5..1.5);
    }
    LowerTriangular::from_dense(m).unwrap()
}

/// `A A^t / p + 0.5 I` with `A` uniform on [-1, 1].
pub fn random_spd(p: usize, rng: &mut SimRng) -> DenseMatrix {
    let a = DenseMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    DenseMatrix::from_fn(p, p, |i, j| {
        let s: f64 = (0..p).map(|k| a[(i, k)] * a[(j, k)]).sum::<f64>() / p as f64;
        if i == j {
            s + 0.5
        } else {
            s
        }
    })
}

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}
