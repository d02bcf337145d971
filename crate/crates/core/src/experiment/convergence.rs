use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{set_seed, ExperimentConfig};
use super::pool;
use crate::analysis::{
    heat_bound, problem_generalization_error, training_error, validation_report, write_convergence_csv, ConvergenceRow,
    Reference,
};
use crate::error::{PinnError, Result};
use crate::nn::{JetSource, NetworkParams};
use crate::problems::Analytic;
use crate::sampling::{build_training_set, QuadratureKind, SetCounts, TrainingSet};
use crate::train::train;

/// One trained network of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    pub n_int: usize,
    pub n_b: usize,
    pub set: usize,
    pub seed: u64,
    pub e_t: f64,
    pub e_g: f64,
    pub e_g_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub runs: Vec<ConvergenceRun>,
}

pub const RUNS_HEADER: [&str; 7] = ["n_int", "n_b", "set", "seed", "e_t", "e_g", "e_g_rel"];

/// Trains `k_sets` networks for every `(n_int, n_b)` pair of the schedule
/// and records cumulative errors and the random-points bound per pair.
/// Writes `convergence.csv`, `convergence_runs.csv` and
/// `convergence.json` into `out` when given.
pub fn run_convergence_study(cfg: &ExperimentConfig, workers: usize, out: Option<&Path>) -> Result<ConvergenceStudy> {
    cfg.validate()?;
    let schedule = cfg.convergence.as_ref().ok_or_else(|| PinnError::Config {
        path: "convergence".into(),
        message: "a convergence study needs a [convergence] table".into(),
    })?;
    if cfg.sampling.kind != QuadratureKind::MonteCarlo {
        return Err(PinnError::Config {
            path: "sampling.kind".into(),
            message: "the convergence study needs monte_carlo points".into(),
        });
    }
    let problem = cfg.build_problem()?;
    if problem.pde.family() != "heat" {
        return Err(PinnError::Config {
            path: "problem.kind".into(),
            message: "the convergence study supports the heat equation".into(),
        });
    }
    let exact = problem.exact.clone().ok_or_else(|| PinnError::Config {
        path: "problem.kind".into(),
        message: "the convergence study needs an exact solution".into(),
    })?;
    let arch = cfg.architecture.architecture();
    let opt = cfg.optimizer.optimizer();
    let ev = &cfg.evaluation;

    let jobs: Vec<(usize, usize)> =
        (0..schedule.n_int.len()).flat_map(|i| (0..schedule.k_sets).map(move |k| (i, k))).collect();
    let trained: Vec<Result<(NetworkParams, TrainingSet)>> = pool::install(workers, || {
        jobs.par_iter()
            .map(|&(i, k)| {
                let counts = SetCounts { n_int: schedule.n_int[i], n_sb: schedule.n_b[i], n_tb: schedule.n_b[i] };
                let seed = set_seed(cfg.sampling.seed, k);
                let set = build_training_set(
                    &problem.geometry,
                    problem.boundary.layout(),
                    counts,
                    QuadratureKind::MonteCarlo,
                    seed,
                )?;
                let o = train(&problem, &set, &arch, &cfg.loss, &opt, cfg.optimizer.restarts, seed)?;
                Ok((o.params, set))
            })
            .collect()
    })?;
    let trained: Vec<(NetworkParams, TrainingSet)> = trained.into_iter().collect::<Result<_>>()?;

    let truth = Analytic(exact.as_ref());
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (i, chunk) in trained.chunks(schedule.k_sets).enumerate() {
        let src: Vec<(&dyn JetSource, &TrainingSet)> = chunk.iter().map(|(n, s)| (n as &dyn JetSource, s)).collect();
        let val = validation_report(&problem, &src, &cfg.loss, ev.validation_seed, ev.validation_draws)?;
        let refs: Vec<(&dyn Reference, &TrainingSet)> = chunk.iter().map(|(n, s)| (n as &dyn Reference, s)).collect();
        let bound = heat_bound(&problem, &refs, &val, &ev.bound_options())?;
        rows.push(ConvergenceRow::new(&val, &bound));
        for (k, (net, set)) in chunk.iter().enumerate() {
            let g = problem_generalization_error(&problem, net, &truth, ev.n_test, ev.test_seed)?;
            let e_t = training_error(&crate::train::assemble_loss(net, &problem, set, &cfg.loss), &problem.pde).e_total;
            runs.push(ConvergenceRun {
                n_int: schedule.n_int[i],
                n_b: schedule.n_b[i],
                set: k,
                seed: set_seed(cfg.sampling.seed, k),
                e_t,
                e_g: g.e_g,
                e_g_rel: g.e_g_rel,
            });
        }
    }
    let study = ConvergenceStudy { rows, runs };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_convergence_csv(&study.rows, &dir.join("convergence.csv"))?;
        let mut w = csv::Writer::from_path(dir.join("convergence_runs.csv"))?;
        w.write_record(RUNS_HEADER)?;
        for r in &study.runs {
            w.write_record([
                r.n_int.to_string(),
                r.n_b.to_string(),
                r.set.to_string(),
                r.seed.to_string(),
                r.e_t.to_string(),
                r.e_g.to_string(),
                r.e_g_rel.to_string(),
            ])?;
        }
        w.flush()?;
        std::fs::write(dir.join("convergence.json"), serde_json::to_string_pretty(&study)? + "\n")?;
    }
    Ok(study)
}
