use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::Truth;
use crate::error::{PinnError, Result};
use crate::sampling::build_training_set;
use crate::train::{
    ensemble_search, log_error_correlation, marginals, write_ensemble_csv, write_marginals_csv, EnsembleResult,
    EnsembleSettings, Marginal,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOutcome {
    /// Sorted by training error, failed configurations last.
    pub results: Vec<EnsembleResult>,
    pub marginals: Vec<Marginal>,
    /// Pearson correlation of the log errors over completed runs.
    pub log_correlation: Option<f64>,
    pub completed: usize,
    pub failed: usize,
}

/// Grid search over the `[ensemble]` table on one training draw. Writes
/// `ensemble.csv` (completed runs only), `marginals.csv` and
/// `ensemble.json` into `out` when given.
pub fn run_ensemble(cfg: &ExperimentConfig, workers: usize, out: Option<&Path>) -> Result<EnsembleOutcome> {
    cfg.validate()?;
    let grid = cfg.ensemble.as_ref().ok_or_else(|| PinnError::Config {
        path: "ensemble".into(),
        message: "an ensemble run needs an [ensemble] table".into(),
    })?;
    let problem = cfg.build_problem()?;
    let ev = &cfg.evaluation;
    let truth = Truth::for_problem(&problem, ev.reference_cells, ev.reference_cfl)?;
    let field = truth.field().ok_or_else(|| PinnError::Config {
        path: "problem.kind".into(),
        message: "ensemble training needs an exact or reference solution".into(),
    })?;
    let seed = cfg.set_seed(0);
    let set = build_training_set(
        &problem.geometry,
        problem.boundary.layout(),
        cfg.sampling.counts(),
        cfg.sampling.kind,
        seed,
    )?;
    let settings = EnsembleSettings {
        activation: cfg.architecture.activation,
        optimizer: cfg.optimizer.optimizer(),
        n_restarts: cfg.optimizer.restarts,
        seed,
        truth: field.as_ref(),
        n_test: ev.n_test,
        test_seed: ev.test_seed,
        workers,
    };
    let results = ensemble_search(&problem, &set, grid, &settings)?;
    let completed: Vec<EnsembleResult> = results.iter().filter(|r| r.error.is_none()).cloned().collect();
    let outcome = EnsembleOutcome {
        marginals: marginals(&results),
        log_correlation: log_error_correlation(&results),
        completed: completed.len(),
        failed: results.len() - completed.len(),
        results,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_ensemble_csv(&completed, &dir.join("ensemble.csv"))?;
        write_marginals_csv(&outcome.marginals, &dir.join("marginals.csv"))?;
        std::fs::write(dir.join("ensemble.json"), serde_json::to_string_pretty(&outcome)? + "\n")?;
    }
    Ok(outcome)
}
