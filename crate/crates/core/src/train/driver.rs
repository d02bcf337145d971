use serde::{Deserialize, Serialize};

use super::loss::{assemble_loss, LossBreakdown, LossConfig, PinnLoss};
use super::optim::{adam_run, lbfgs_run, AdamConfig, LbfgsConfig, OptimResult};
use crate::error::{PinnError, Result};
use crate::nn::{init_params, loss_gradient, Activation, InitScheme, InputScaling, NetworkParams};
use crate::problems::ProblemSpec;
use crate::sampling::TrainingSet;

/// Seed offset between consecutive restarts.
pub const RESTART_SEED_STRIDE: u64 = 1_000_003;

pub fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_add(RESTART_SEED_STRIDE.wrapping_mul(restart as u64))
}

/// Hidden layers of equal width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    /// Number of hidden layers.
    pub depth: usize,
    pub width: usize,
    pub activation: Activation,
}

impl Architecture {
    pub fn layer_dims(&self, input_dim: usize, output_dim: usize) -> Vec<usize> {
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat(self.width).take(self.depth));
        dims.push(output_dim);
        dims
    }
}

/// Optimizer and its budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerConfig {
    Lbfgs(LbfgsConfig),
    Adam(AdamConfig),
    /// Adam warm-up followed by L-BFGS.
    AdamLbfgs {
        adam: AdamConfig,
        lbfgs: LbfgsConfig,
    },
}

/// Result of `train`.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    pub loss_history: Vec<f64>,
    pub final_breakdown: LossBreakdown,
    pub restart_index: usize,
    pub seed: u64,
    /// Final loss of every restart (`None` if it diverged).
    pub restart_losses: Vec<Option<f64>>,
    pub iterations: usize,
    pub line_search_failed: bool,
}

/// Fresh network for a problem with inputs scaled from its box.
pub fn init_network(problem: &ProblemSpec, arch: &Architecture, seed: u64) -> Result<NetworkParams> {
    let dims = arch.layer_dims(problem.input_dim(), problem.output_dim);
    let scaling = InputScaling::from_box(&problem.geometry.lower_full(), &problem.geometry.upper_full());
    init_params(seed, &dims, arch.activation, InitScheme::XavierUniform)?.with_scaling(scaling)
}

/// Minimizes the training loss starting from `params`.
pub fn optimize(
    problem: &ProblemSpec,
    sets: &TrainingSet,
    cfg: &LossConfig,
    opt: &OptimizerConfig,
    params: NetworkParams,
) -> Result<(NetworkParams, OptimResult)> {
    cfg.validate()?;
    let objective = PinnLoss::new(problem, sets, *cfg, params.weight_mask());
    let template = params.clone();
    let eval = |theta: &[f64]| {
        let p = template.with_flat(theta.to_vec()).expect("parameter length is fixed");
        loss_gradient(&p, &objective)
    };
    let theta0 = params.into_flat();
    let result = match opt {
        OptimizerConfig::Lbfgs(c) => lbfgs_run(eval, &theta0, c)?,
        OptimizerConfig::Adam(c) => adam_run(eval, &theta0, c)?,
        OptimizerConfig::AdamLbfgs { adam, lbfgs } => {
            let first = adam_run(eval, &theta0, adam)?;
            let mut second = lbfgs_run(eval, &first.theta, lbfgs)?;
            let mut history = first.history;
            history.extend_from_slice(&second.history[1..]);
            second.history = history;
            second.iterations += first.iterations;
            second.evaluations += first.evaluations;
            second
        }
    };
    Ok((template.with_flat(result.theta.clone())?, result))
}

/// Trains `n_restarts` independently initialized networks and keeps the
/// one with the smallest final training loss.
pub fn train(
    problem: &ProblemSpec,
    sets: &TrainingSet,
    arch: &Architecture,
    cfg: &LossConfig,
    opt: &OptimizerConfig,
    n_restarts: usize,
    seed: u64,
) -> Result<TrainOutcome> {
    if n_restarts == 0 {
        return Err(PinnError::InvalidArgument("need at least one restart".into()));
    }
    let mut best: Option<TrainOutcome> = None;
    let mut restart_losses = Vec::with_capacity(n_restarts);
    let mut failures = Vec::new();
    for r in 0..n_restarts {
        let s = restart_seed(seed, r);
        let run = init_network(problem, arch, s).and_then(|p| optimize(problem, sets, cfg, opt, p));
        match run {
            Ok((params, result)) => {
                let breakdown = assemble_loss(&params, problem, sets, cfg);
                if !breakdown.total.is_finite() {
                    failures.push(format!("restart {r} (seed {s}): non-finite final loss"));
                    restart_losses.push(None);
                    continue;
                }
                restart_losses.push(Some(breakdown.total));
                if best.as_ref().map_or(true, |b| breakdown.total < b.final_breakdown.total) {
                    best = Some(TrainOutcome {
                        params,
                        loss_history: result.history,
                        final_breakdown: breakdown,
                        restart_index: r,
                        seed: s,
                        restart_losses: Vec::new(),
                        iterations: result.iterations,
                        line_search_failed: result.line_search_failed,
                    });
                }
            }
            Err(e) => {
                failures.push(format!("restart {r} (seed {s}): {e}"));
                restart_losses.push(None);
            }
        }
    }
    match best {
        Some(mut b) => {
            b.restart_losses = restart_losses;
            Ok(b)
        }
        None => Err(PinnError::Divergence(format!("all restarts failed: {}", failures.join("; ")))),
    }
}
