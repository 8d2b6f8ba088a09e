//! Simulation generators: fixed covariance scenarios, random sparse Cholesky
//! factors and Gaussian sampling through a factor.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_decompose, DataSample, DenseMatrix, LowerTriangular};

/// The generator used everywhere a seed is recorded.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScenarioKind {
    /// `sigma_ij = 0.7^|i - j|`
    Ar1,
    /// Unit diagonal, 0.4 / 0.2 / 0.1 on the first four off-diagonals.
    #[serde(rename = "BANDED4")]
    Banded4,
    /// Unit diagonal, 0.5 elsewhere.
    #[serde(rename = "DENSE05")]
    Dense05,
    /// Random sparse factor with nonzero proportion `i / p`.
    RandomSparse,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Ar1 => "AR1",
            ScenarioKind::Banded4 => "BANDED4",
            ScenarioKind::Dense05 => "DENSE05",
            ScenarioKind::RandomSparse => "RANDOM_SPARSE",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "AR1" => Ok(ScenarioKind::Ar1),
            "BANDED4" => Ok(ScenarioKind::Banded4),
            "DENSE05" => Ok(ScenarioKind::Dense05),
            "RANDOM_SPARSE" | "SPARSE" => Ok(ScenarioKind::RandomSparse),
            other => Err(Error::InvalidConfig(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub p: usize,
    /// Numerator `i` of the nonzero proportion `i / p` (random sparse only).
    #[serde(default)]
    pub density: Option<u32>,
    pub n: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidConfig(format!(
                "p must be at least 2, got {}",
                self.p
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.kind == ScenarioKind::RandomSparse {
            match self.density {
                Some(i) if i >= 1 && (i as usize) <= self.p => {}
                Some(i) => {
                    return Err(Error::InvalidConfig(format!(
                        "density numerator {i} must lie in 1..={}",
                        self.p
                    )))
                }
                None => {
                    return Err(Error::InvalidConfig(
                        "random sparse scenario needs a density numerator".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    /// Nonzero proportion `i / p` (random sparse only).
    pub fn density_fraction(&self) -> Option<f64> {
        self.density.map(|i| i as f64 / self.p as f64)
    }

    /// The true factor for one replicate: the Cholesky factor of the fixed
    /// matrix, or a fresh random sparse factor drawn from `rng`.
    pub fn truth<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LowerTriangular> {
        self.validate()?;
        match self.kind {
            ScenarioKind::RandomSparse => Ok(random_sparse_cholesky(
                self.p,
                self.density_fraction().expect("validated"),
                rng,
            )),
            kind => cholesky_decompose(&fixed_sigma(kind, self.p)?),
        }
    }
}

/// One of the three fixed covariance matrices, verified positive definite.
pub fn fixed_sigma(kind: ScenarioKind, p: usize) -> Result<DenseMatrix> {
    if p < 2 {
        return Err(Error::InvalidConfig(format!(
            "p must be at least 2, got {p}"
        )));
    }
    let entry: fn(usize) -> f64 = match kind {
        ScenarioKind::Ar1 => |d| 0.7f64.powi(d as i32),
        ScenarioKind::Banded4 => |d| match d {
            0 => 1.0,
            1 => 0.4,
            2 | 3 => 0.2,
            4 => 0.1,
            _ => 0.0,
        },
        ScenarioKind::Dense05 => |d| if d == 0 { 1.0 } else { 0.5 },
        ScenarioKind::RandomSparse => {
            return Err(Error::InvalidConfig(
                "random sparse scenarios have no fixed covariance".into(),
            ))
        }
    };
    let sigma = DenseMatrix::from_fn(p, p, |i, j| entry(i.abs_diff(j)));
    cholesky_decompose(&sigma)?;
    Ok(sigma)
}

/// Random lower-triangular factor: each strictly-lower entry is nonzero
/// with probability `density`, with magnitude uniform on [0.1, 1] and a
/// random sign; the diagonal is uniform on [0.5, 1.5].
pub fn random_sparse_cholesky<R: Rng + ?Sized>(
    p: usize,
    density: f64,
    rng: &mut R,
) -> LowerTriangular {
    let density = density.clamp(0.0, 1.0);
    let mut t = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..i {
            if rng.random_bool(density) {
                let magnitude = rng.random_range(0.1..=1.0);
                t[(i, j)] = if rng.random_bool(0.5) {
                    magnitude
                } else {
                    -magnitude
                };
            }
        }
        t[(i, i)] = rng.random_range(0.5..=1.5);
    }
    LowerTriangular::from_dense_unchecked(t)
}

/// `n` rows `T z` with `z` standard normal.
pub fn sample_gaussian<R: Rng + ?Sized>(
    t: &LowerTriangular,
    n: usize,
    rng: &mut R,
) -> Result<DataSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let p = t.dim();
    let mut values = Vec::with_capacity(n * p);
    let mut z = vec![0.0; p];
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        for i in 0..p {
            let row = &t.as_dense().row(i)[..=i];
            values.push(row.iter().zip(&z).map(|(a, b)| a * b).sum());
        }
    }
    Ok(DataSample::new(DenseMatrix::from_row_major(n, p, values)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_matrices_match_definitions() {
        let ar = fixed_sigma(ScenarioKind::Ar1, 3).unwrap();
        let expected = [1.0, 0.7, 0.49, 0.7, 1.0, 0.7, 0.49, 0.7, 1.0];
        for (a, b) in ar.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let b4 = fixed_sigma(ScenarioKind::Banded4, 6).unwrap();
        assert_eq!(b4.row(0), &[1.0, 0.4, 0.2, 0.2, 0.1, 0.0]);
        let d = fixed_sigma(ScenarioKind::Dense05, 2).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 0.5, 0.5, 1.0]);
        assert!(fixed_sigma(ScenarioKind::RandomSparse, 4).is_err());
    }

    #[test]
    fn fixed_matrices_are_pd_across_sizes() {
        for p in [2, 5, 30, 100, 200] {
            for kind in [
                ScenarioKind::Ar1,
                ScenarioKind::Banded4,
                ScenarioKind::Dense05,
            ] {
                fixed_sigma(kind, p).unwrap();
            }
        }
    }

    #[test]
    fn same_seed_same_factor() {
        let a = random_sparse_cholesky(12, 0.3, &mut rng_from_seed(9));
        let b = random_sparse_cholesky(12, 0.3, &mut rng_from_seed(9));
        assert_eq!(a, b);
        let c = random_sparse_cholesky(12, 0.3, &mut rng_from_seed(10));
        assert_ne!(a, c);
    }

    #[test]
    fn generated_entries_respect_bounds() {
        let t = random_sparse_cholesky(30, 0.5, &mut rng_from_seed(1));
        for i in 0..30 {
            assert!((0.5..=1.5).contains(&t.get(i, i)));
            for j in 0..i {
                let v = t.get(i, j).abs();
                assert!(v == 0.0 || (0.1..=1.0).contains(&v));
            }
        }
        cholesky_decompose(&t.gram()).unwrap();
    }

    #[test]
    fn single_draw_is_finite() {
        let d = sample_gaussian(&LowerTriangular::identity(4), 1, &mut rng_from_seed(3)).unwrap();
        assert_eq!(d.n(), 1);
        assert!(d.row(0).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn scenario_validation() {
        let mut s = ScenarioSpec {
            kind: ScenarioKind::RandomSparse,
            p: 30,
            density: None,
            n: 200,
            seed: 1,
        };
        assert!(s.validate().is_err());
        s.density = Some(2);
        assert!(s.validate().is_ok());
        assert!((s.density_fraction().unwrap() - 2.0 / 30.0).abs() < 1e-15);
        s.p = 1;
        assert!(s.validate().is_err());
        assert_eq!(
            "banded4".parse::<ScenarioKind>().unwrap(),
            ScenarioKind::Banded4
        );
    }
}
