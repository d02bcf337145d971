use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::driver::{train, Architecture, OptimizerConfig};
use super::loss::LossConfig;
use crate::analysis::{problem_generalization_error, training_error};
use crate::error::{PinnError, Result};
use crate::field::Field;
use crate::nn::Activation;
use crate::problems::ProblemSpec;
use crate::sampling::TrainingSet;

/// Cross product of hyperparameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperGrid {
    /// Hidden layers.
    pub depth: Vec<usize>,
    pub width: Vec<usize>,
    /// Regularization exponent.
    pub q: Vec<u32>,
    pub lambda_reg: Vec<f64>,
    /// Interior residual weight.
    pub lambda: Vec<f64>,
}

/// One grid configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPoint {
    pub depth: usize,
    pub width: usize,
    pub q: u32,
    pub lambda_reg: f64,
    pub lambda: f64,
}

impl HyperPoint {
    pub fn architecture(&self, activation: Activation) -> Architecture {
        Architecture { depth: self.depth, width: self.width, activation }
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig { lambda_residual: self.lambda, reg_exponent: self.q, lambda_reg: self.lambda_reg }
    }
}

impl HyperGrid {
    pub fn single(p: HyperPoint) -> Self {
        Self {
            depth: vec![p.depth],
            width: vec![p.width],
            q: vec![p.q],
            lambda_reg: vec![p.lambda_reg],
            lambda: vec![p.lambda],
        }
    }

    pub fn len(&self) -> usize {
        self.depth.len() * self.width.len() * self.q.len() * self.lambda_reg.len() * self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All configurations, the last listed hyperparameter varying fastest.
    pub fn points(&self) -> Vec<HyperPoint> {
        let mut out = Vec::with_capacity(self.len());
        for &depth in &self.depth {
            for &width in &self.width {
                for &q in &self.q {
                    for &lambda_reg in &self.lambda_reg {
                        for &lambda in &self.lambda {
                            out.push(HyperPoint { depth, width, q, lambda_reg, lambda });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Outcome of one grid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    /// Position in `HyperGrid::points`.
    pub index: usize,
    pub config: HyperPoint,
    /// Winning restart.
    pub restart: usize,
    /// Total training error of the selected network.
    pub train_error: f64,
    /// Relative generalization error in percent.
    pub gen_error_rel: f64,
    /// Left out of JSON so repeated runs serialize identically.
    #[serde(skip_serializing, default)]
    pub wall_time_s: f64,
    /// Failure message if the configuration did not train.
    pub error: Option<String>,
}

/// Settings shared by every configuration of an ensemble.
pub struct EnsembleSettings<'a> {
    pub activation: Activation,
    pub optimizer: OptimizerConfig,
    pub n_restarts: usize,
    pub seed: u64,
    /// Truth for the generalization error.
    pub truth: &'a dyn Field,
    pub n_test: usize,
    pub test_seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

fn run_one(
    problem: &ProblemSpec,
    sets: &TrainingSet,
    index: usize,
    p: HyperPoint,
    s: &EnsembleSettings<'_>,
) -> EnsembleResult {
    let start = Instant::now();
    let outcome =
        train(problem, sets, &p.architecture(s.activation), &p.loss_config(), &s.optimizer, s.n_restarts, s.seed)
            .and_then(|o| {
                let te = training_error(&o.final_breakdown, &problem.pde).e_total;
                let ge = problem_generalization_error(problem, &o.params, s.truth, s.n_test, s.test_seed)?;
                Ok((o.restart_index, te, ge.e_g_rel))
            });
    let wall_time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((restart, train_error, gen_error_rel)) => {
            EnsembleResult { index, config: p, restart, train_error, gen_error_rel, wall_time_s, error: None }
        }
        Err(e) => EnsembleResult {
            index,
            config: p,
            restart: 0,
            train_error: f64::NAN,
            gen_error_rel: f64::NAN,
            wall_time_s,
            error: Some(e.to_string()),
        },
    }
}

/// Trains every grid configuration and returns the results sorted by
/// training error, failed configurations last.
pub fn ensemble_search(
    problem: &ProblemSpec,
    sets: &TrainingSet,
    grid: &HyperGrid,
    settings: &EnsembleSettings<'_>,
) -> Result<Vec<EnsembleResult>> {
    let points = grid.points();
    let work = || -> Vec<EnsembleResult> {
        points.par_iter().enumerate().map(|(i, &p)| run_one(problem, sets, i, p, settings)).collect()
    };
    let mut results = if settings.workers == 0 {
        work()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.workers)
            .build()
            .map_err(|e| PinnError::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(work)
    };
    results.sort_by(|a, b| {
        let key = |r: &EnsembleResult| if r.train_error.is_finite() { r.train_error } else { f64::INFINITY };
        key(a).total_cmp(&key(b)).then(a.index.cmp(&b.index))
    });
    Ok(results)
}

/// Generalization-error statistics of all runs sharing one value of one
/// hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub param: String,
    pub value: f64,
    /// Runs with this value, failed ones included.
    pub count: usize,
    pub failed: usize,
    pub mean_gen_error_rel: f64,
    pub median_gen_error_rel: f64,
    pub min_gen_error_rel: f64,
}

const PARAMS: [&str; 5] = ["depth", "width", "q", "lambda_reg", "lambda"];

fn param_value(p: &HyperPoint, name: &str) -> f64 {
    match name {
        "depth" => p.depth as f64,
        "width" => p.width as f64,
        "q" => p.q as f64,
        "lambda_reg" => p.lambda_reg,
        _ => p.lambda,
    }
}

/// Per-hyperparameter marginals. For every parameter the counts add up to
/// the number of runs.
pub fn marginals(results: &[EnsembleResult]) -> Vec<Marginal> {
    let mut out = Vec::new();
    for name in PARAMS {
        let mut values: Vec<f64> = results.iter().map(|r| param_value(&r.config, name)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for v in values {
            let group: Vec<&EnsembleResult> = results.iter().filter(|r| param_value(&r.config, name) == v).collect();
            let mut errs: Vec<f64> = group.iter().map(|r| r.gen_error_rel).filter(|e| e.is_finite()).collect();
            errs.sort_by(f64::total_cmp);
            let (mean, median, min) = if errs.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                let n = errs.len();
                let median = if n % 2 == 1 { errs[n / 2] } else { 0.5 * (errs[n / 2 - 1] + errs[n / 2]) };
                (errs.iter().sum::<f64>() / n as f64, median, errs[0])
            };
            out.push(Marginal {
                param: name.into(),
                value: v,
                count: group.len(),
                failed: group.len() - errs.len(),
                mean_gen_error_rel: mean,
                median_gen_error_rel: median,
                min_gen_error_rel: min,
            });
        }
    }
    out
}

/// Pearson correlation of `ln train_error` and `ln gen_error_rel` over the
/// successful runs.
pub fn log_error_correlation(results: &[EnsembleResult]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| {
            r.train_error > 0.0 && r.gen_error_rel > 0.0 && r.train_error.is_finite() && r.gen_error_rel.is_finite()
        })
        .map(|r| (r.train_error.ln(), r.gen_error_rel.ln()))
        .collect();
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

pub const ENSEMBLE_HEADER: [&str; 9] =
    ["depth", "width", "q", "lambda_reg", "lambda", "restart", "train_error", "gen_error_rel", "wall_time_s"];

pub fn write_ensemble_csv_to<W: Write>(results: &[EnsembleResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ENSEMBLE_HEADER)?;
    for r in results {
        let c = &r.config;
        out.write_record([
            c.depth.to_string(),
            c.width.to_string(),
            c.q.to_string(),
            c.lambda_reg.to_string(),
            c.lambda.to_string(),
            r.restart.to_string(),
            r.train_error.to_string(),
            r.gen_error_rel.to_string(),
            format!("{:.3}", r.wall_time_s),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_ensemble_csv(results: &[EnsembleResult], path: &Path) -> Result<()> {
    write_ensemble_csv_to(results, std::fs::File::create(path)?)
}

pub fn write_marginals_csv(marginals: &[Marginal], path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record([
        "param",
        "value",
        "count",
        "failed",
        "mean_gen_error_rel",
        "median_gen_error_rel",
        "min_gen_error_rel",
    ])?;
    for m in marginals {
        out.write_record([
            m.param.clone(),
            m.value.to_string(),
            m.count.to_string(),
            m.failed.to_string(),
            m.mean_gen_error_rel.to_string(),
            m.median_gen_error_rel.to_string(),
            m.min_gen_error_rel.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
