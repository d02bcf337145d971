use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::analysis::{
    burgers_bound, euler_bound, heat_bound, problem_generalization_error, training_error, validation_report,
    BoundReport, FdJets, GeneralizationReport, Reference, TrainingErrorReport, ValidationReport,
};
use crate::error::Result;
use crate::field::Field;
use crate::nn::{save_checkpoint, JetSource, NetworkParams};
use crate::problems::{Analytic, ExactSolution, ProblemSpec};
use crate::reference::{fv_solve, FvGrid};
use crate::sampling::{build_training_set, QuadratureKind, TrainingSet};
use crate::train::{train, LossBreakdown};

/// Ground truth used for generalization errors and bounds.
pub enum Truth {
    Exact(Arc<dyn ExactSolution>),
    FiniteVolume(FvGrid),
    None,
}

impl Truth {
    /// Exact solution if the problem has one, otherwise a finite-volume
    /// reference for 1D conservation laws.
    pub fn for_problem(problem: &ProblemSpec, cells: usize, cfl: f64) -> Result<Self> {
        if let Some(e) = &problem.exact {
            return Ok(Truth::Exact(e.clone()));
        }
        if problem.pde.family() == "conservation_law" && problem.spatial_dim() == 1 {
            return Ok(Truth::FiniteVolume(fv_solve(problem, cells, problem.t_final(), cfl)?));
        }
        Ok(Truth::None)
    }

    pub fn describe(&self) -> String {
        match self {
            Truth::Exact(_) => "exact".into(),
            Truth::FiniteVolume(g) => format!("finite_volume({} cells, cfl {})", g.n_cells, g.cfl),
            Truth::None => "none".into(),
        }
    }

    pub fn field(&self) -> Option<Box<dyn Field + '_>> {
        match self {
            Truth::Exact(e) => Some(Box::new(Analytic(e.as_ref()))),
            Truth::FiniteVolume(g) => Some(Box::new(g)),
            Truth::None => None,
        }
    }

    /// Differentiable view. Finite-volume data is differenced over about
    /// two cells.
    pub fn reference<'a>(&'a self, problem: &ProblemSpec) -> Option<Box<dyn Reference + 'a>> {
        match self {
            Truth::Exact(e) => Some(Box::new(Analytic(e.as_ref()))),
            Truth::FiniteVolume(g) => {
                let rel = (2.0 / g.n_cells as f64).max(1e-4);
                Some(Box::new(FdJets::new(g, &problem.geometry, rel)))
            }
            Truth::None => None,
        }
    }
}

/// Training and evaluation of one training draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetOutcome {
    pub set: usize,
    pub seed: u64,
    pub restart: usize,
    pub restart_losses: Vec<Option<f64>>,
    pub iterations: usize,
    pub line_search_failed: bool,
    pub loss: LossBreakdown,
    pub training_error: TrainingErrorReport,
    pub generalization: Option<GeneralizationReport>,
}

/// Everything `run_experiment` reports. Contains no timings, so identical
/// configs give identical summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub family: String,
    pub parameter: String,
    pub reference: String,
    pub config: ExperimentConfig,
    pub sets: Vec<SetOutcome>,
    /// Averages over training draws.
    pub e_t_bar: f64,
    pub e_g_bar: Option<f64>,
    pub e_g_rel_bar: Option<f64>,
    pub validation: Option<ValidationReport>,
    pub bound: Option<BoundReport>,
    /// Why no bound was computed.
    pub bound_note: Option<String>,
}

impl RunSummary {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// In-memory result of `run_experiment`.
pub struct ExperimentRun {
    pub summary: RunSummary,
    pub problem: ProblemSpec,
    pub networks: Vec<NetworkParams>,
    pub sets: Vec<TrainingSet>,
    pub loss_histories: Vec<Vec<f64>>,
    pub truth: Truth,
}

pub const RESULTS_HEADER: [&str; 12] =
    ["problem", "parameter", "n_int", "n_sb", "n_tb", "depth", "width", "l1_reg", "l2_reg", "lambda", "e_t", "e_g_rel"];

fn mean(v: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn compute_bound(
    cfg: &ExperimentConfig,
    problem: &ProblemSpec,
    networks: &[NetworkParams],
    sets: &[TrainingSet],
    truth: &Truth,
) -> (Option<ValidationReport>, Result<BoundReport>) {
    let opts = cfg.evaluation.bound_options();
    let unavailable = |why: &str| crate::error::PinnError::InvalidArgument(why.into());
    match problem.pde.family() {
        "heat" => {
            if cfg.sampling.kind != QuadratureKind::MonteCarlo {
                return (None, Err(unavailable("the random-points bound needs monte_carlo sampling")));
            }
            let runs: Vec<(&dyn JetSource, &TrainingSet)> =
                networks.iter().zip(sets).map(|(n, s)| (n as &dyn JetSource, s)).collect();
            let val = match validation_report(
                problem,
                &runs,
                &cfg.loss,
                cfg.evaluation.validation_seed,
                cfg.evaluation.validation_draws,
            ) {
                Ok(v) => v,
                Err(e) => return (None, Err(e)),
            };
            let refs: Vec<(&dyn Reference, &TrainingSet)> =
                networks.iter().zip(sets).map(|(n, s)| (n as &dyn Reference, s)).collect();
            let b = heat_bound(problem, &refs, &val, &opts);
            (Some(val), b)
        }
        "conservation_law" => match truth.reference(problem) {
            Some(r) => (None, burgers_bound(problem, &networks[0], &sets[0], r.as_ref(), &opts)),
            None => (None, Err(unavailable("no reference solution"))),
        },
        _ => match truth {
            Truth::Exact(e) => (None, euler_bound(problem, &networks[0], &sets[0], &Analytic(e.as_ref()), &opts)),
            _ => (None, Err(unavailable("the Euler bound needs an exact solution"))),
        },
    }
}

/// Trains `k_sets` networks on independent draws, evaluates their errors
/// and the applicable bound. Writes `summary.json`, `results.csv`,
/// `loss_history.csv` and `checkpoint.json` into `out` when given.
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentRun> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let arch = cfg.architecture.architecture();
    let opt = cfg.optimizer.optimizer();
    let ev = &cfg.evaluation;
    let truth = Truth::for_problem(&problem, ev.reference_cells, ev.reference_cfl)?;
    let truth_field = truth.field();

    let mut networks = Vec::new();
    let mut sets = Vec::new();
    let mut outcomes = Vec::new();
    let mut histories = Vec::new();
    for k in 0..cfg.sampling.k_sets {
        let seed = cfg.set_seed(k);
        let set = build_training_set(
            &problem.geometry,
            problem.boundary.layout(),
            cfg.sampling.counts(),
            cfg.sampling.kind,
            seed,
        )?;
        let o = train(&problem, &set, &arch, &cfg.loss, &opt, cfg.optimizer.restarts, seed)?;
        let generalization = match &truth_field {
            Some(t) => Some(problem_generalization_error(&problem, &o.params, t.as_ref(), ev.n_test, ev.test_seed)?),
            None => None,
        };
        outcomes.push(SetOutcome {
            set: k,
            seed,
            restart: o.restart_index,
            restart_losses: o.restart_losses.clone(),
            iterations: o.iterations,
            line_search_failed: o.line_search_failed,
            training_error: training_error(&o.final_breakdown, &problem.pde),
            loss: o.final_breakdown,
            generalization,
        });
        histories.push(o.loss_history);
        networks.push(o.params);
        sets.push(set);
    }

    let (validation, bound, bound_note) = if ev.bound {
        match compute_bound(cfg, &problem, &networks, &sets, &truth) {
            (v, Ok(b)) => (v, Some(b), None),
            (v, Err(e)) => (v, None, Some(e.to_string())),
        }
    } else {
        (None, None, Some("disabled".into()))
    };

    let summary = RunSummary {
        problem: problem.name.clone(),
        family: problem.pde.family().into(),
        parameter: cfg.problem.parameter(),
        reference: truth.describe(),
        config: cfg.clone(),
        e_t_bar: mean(outcomes.iter().map(|o| o.training_error.e_total)).unwrap_or(f64::NAN),
        e_g_bar: mean(outcomes.iter().filter_map(|o| o.generalization.as_ref().map(|g| g.e_g))),
        e_g_rel_bar: mean(outcomes.iter().filter_map(|o| o.generalization.as_ref().map(|g| g.e_g_rel))),
        sets: outcomes,
        validation,
        bound,
        bound_note,
    };
    drop(truth_field);
    let run = ExperimentRun { summary, problem, networks, sets, loss_histories: histories, truth };
    if let Some(dir) = out {
        write_run(&run, dir)?;
    }
    Ok(run)
}

fn write_run(run: &ExperimentRun, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let s = &run.summary;
    std::fs::write(dir.join("summary.json"), s.to_json()? + "\n")?;
    save_checkpoint(&run.networks[0], &dir.join("checkpoint.json"))?;

    let cfg = &s.config;
    let (l1, l2) = if cfg.loss.reg_exponent == 1 { (cfg.loss.lambda_reg, 0.0) } else { (0.0, cfg.loss.lambda_reg) };
    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    w.write_record(RESULTS_HEADER)?;
    w.write_record([
        s.problem.clone(),
        s.parameter.clone(),
        cfg.sampling.n_int.to_string(),
        cfg.sampling.n_sb.to_string(),
        cfg.sampling.n_tb.to_string(),
        cfg.architecture.depth.to_string(),
        cfg.architecture.width.to_string(),
        l1.to_string(),
        l2.to_string(),
        cfg.loss.lambda_residual.to_string(),
        s.e_t_bar.to_string(),
        s.e_g_rel_bar.map_or(String::new(), |v| v.to_string()),
    ])?;
    w.flush()?;

    let mut h = csv::Writer::from_path(dir.join("loss_history.csv"))?;
    h.write_record(["set", "iteration", "loss"])?;
    for (k, hist) in run.loss_histories.iter().enumerate() {
        for (i, v) in hist.iter().enumerate() {
            h.write_record([k.to_string(), i.to_string(), v.to_string()])?;
        }
    }
    h.flush()?;
    Ok(())
}
