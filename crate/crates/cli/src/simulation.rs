//! Replicated simulation runs: draw a truth, sample, fit every method, score.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cholcov::linalg::induced_one_norm_diff;
use cholcov::linalg::Standardization;
use cholcov::metrics::{support_metrics, SOLVER_ZERO_TOL};
use cholcov::simulate::{rng_from_seed, sample_gaussian, ScenarioSpec};
use cholcov::{estimate, LowerTriangular, Method};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// One row of the result CSV. Metric fields are empty when the fit failed or
/// the metric is undefined; `error` says why.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub scenario: String,
    pub p: usize,
    pub n: usize,
    pub density: Option<f64>,
    pub replicate: usize,
    pub seed: u64,
    #[serde(rename = "f1_T")]
    pub f1_t: Option<f64>,
    #[serde(rename = "tpr_T")]
    pub tpr_t: Option<f64>,
    #[serde(rename = "tdr_T")]
    pub tdr_t: Option<f64>,
    #[serde(rename = "f1_Sigma")]
    pub f1_sigma: Option<f64>,
    pub norm_diff: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub hyperparameter: Option<f64>,
    pub error: Option<String>,
}

/// Everything one replicate produced.
#[derive(Clone, Debug)]
pub struct ReplicateOutput {
    pub replicate: usize,
    pub seed: u64,
    pub truth: LowerTriangular,
    /// One entry per configured method, in config order.
    pub fits: Vec<(Method, Option<LowerTriangular>)>,
    pub rows: Vec<ResultRow>,
}

/// Seed of replicate `r`. A run with `seed = replicate_seed(base, r)` and one
/// replicate reproduces replicate `r` of the original run.
pub fn replicate_seed(base: u64, r: usize) -> u64 {
    base.wrapping_add(r as u64)
}

fn scenario_of(config: &ExperimentConfig) -> Result<&ScenarioSpec> {
    config
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::Config("simulation needs a [scenario] section".into()))
}

/// Runs one replicate. Fitting or scoring failures end up in the rows;
/// only a failure to generate the data is returned as an error.
pub fn run_replicate(config: &ExperimentConfig, replicate: usize) -> Result<ReplicateOutput> {
    let scenario = scenario_of(config)?;
    let seed = replicate_seed(scenario.seed, replicate);
    let mut rng = rng_from_seed(seed);
    let truth = scenario.truth(&mut rng)?;
    let mut data = sample_gaussian(&truth, scenario.n, &mut rng)?;
    if config.standardize {
        data = Standardization::fit(&data)?.apply(&data)?;
    }
    let sigma = truth.gram();

    let mut fits = Vec::with_capacity(config.methods.len());
    let mut rows = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let mut row = ResultRow {
            method: method.name().to_owned(),
            scenario: scenario.kind.name().to_owned(),
            p: scenario.p,
            n: scenario.n,
            density: scenario.density_fraction(),
            replicate,
            seed,
            f1_t: None,
            tpr_t: None,
            tdr_t: None,
            f1_sigma: None,
            norm_diff: None,
            wall_time_s: None,
            hyperparameter: None,
            error: None,
        };
        let started = Instant::now();
        let fitted = estimate(&data, &config.estimator(method));
        let elapsed = started.elapsed().as_secs_f64();
        if config.timing {
            row.wall_time_s = Some(elapsed);
        }
        match fitted {
            Ok(fit) => {
                row.hyperparameter = Some(fit.hyperparameter);
                let est = fit.factor.as_dense();
                let mut problems = Vec::new();
                match support_metrics(truth.as_dense(), est, SOLVER_ZERO_TOL) {
                    Ok(s) => {
                        row.f1_t = Some(s.f1);
                        row.tpr_t = Some(s.tpr);
                        row.tdr_t = Some(s.tdr);
                    }
                    Err(e) => problems.push(format!("T support: {e}")),
                }
                match support_metrics(&sigma, &fit.factor.gram(), SOLVER_ZERO_TOL) {
                    Ok(s) => row.f1_sigma = Some(s.f1),
                    Err(e) => problems.push(format!("Sigma support: {e}")),
                }
                row.norm_diff = Some(induced_one_norm_diff(truth.as_dense(), est)?);
                if !problems.is_empty() {
                    row.error = Some(problems.join("; "));
                }
                fits.push((method, Some(fit.factor)));
            }
            Err(e) => {
                row.error = Some(e.to_string());
                fits.push((method, None));
            }
        }
        rows.push(row);
    }
    Ok(ReplicateOutput {
        replicate,
        seed,
        truth,
        fits,
        rows,
    })
}

/// Runs every replicate on the rayon pool; output is in replicate order
/// whatever the scheduling.
pub fn run_simulation(config: &ExperimentConfig) -> Result<Vec<ReplicateOutput>> {
    config.validate()?;
    scenario_of(config)?;
    (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config, r))
        .collect()
}

/// Flattens replicate outputs into result rows.
pub fn result_rows(outputs: &[ReplicateOutput]) -> Vec<ResultRow> {
    outputs
        .iter()
        .flat_map(|o| o.rows.iter().cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cholcov::simulate::ScenarioKind;

    fn small(kind: ScenarioKind) -> ExperimentConfig {
        ExperimentConfig {
            scenario: Some(ScenarioSpec {
                kind,
                p: 6,
                density: (kind == ScenarioKind::RandomSparse).then_some(2),
                n: 60,
                seed: 11,
            }),
            replicates: 2,
            lambda_grid: Some(vec![0.3, 0.1, 0.03]),
            ..Default::default()
        }
    }

    #[test]
    fn one_row_per_method_and_replicate() {
        let out = run_simulation(&small(ScenarioKind::Ar1)).unwrap();
        let rows = result_rows(&out);
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[4].replicate, 1);
        assert_eq!(rows[4].seed, 12);
        assert!(rows.iter().all(|r| r.wall_time_s.is_none()));
        for r in &rows {
            if let Some(f1) = r.f1_t {
                assert!((0.0..=1.0).contains(&f1));
            }
            assert!(r.norm_diff.unwrap() >= 0.0);
        }
    }

    #[test]
    fn replicate_is_reproducible_in_isolation() {
        let config = small(ScenarioKind::RandomSparse);
        let full = run_simulation(&config).unwrap();
        let mut alone = config.clone();
        alone.replicates = 1;
        alone.scenario.as_mut().unwrap().seed = full[1].seed;
        let single = run_simulation(&alone).unwrap();
        let strip = |rows: &[ResultRow]| {
            rows.iter()
                .map(|r| (r.f1_t, r.norm_diff, r.hyperparameter))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&single[0].rows), strip(&full[1].rows));
    }

    #[test]
    fn timing_is_opt_in() {
        let mut c = small(ScenarioKind::Ar1);
        c.timing = true;
        c.replicates = 1;
        c.methods = vec![Method::Band];
        let rows = result_rows(&run_simulation(&c).unwrap());
        assert!(rows[0].wall_time_s.unwrap() >= 0.0);
    }

    #[test]
    fn missing_scenario_is_config_error() {
        let c = ExperimentConfig::default();
        assert!(matches!(run_simulation(&c), Err(CliError::Config(_))));
    }
}
