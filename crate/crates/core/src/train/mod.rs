//! Loss assembly, optimizers, restarts and ensemble search.

mod driver;
mod ensemble;
mod loss;
mod optim;

pub use driver::{
    init_network, optimize, restart_seed, train, Architecture, OptimizerConfig, TrainOutcome, RESTART_SEED_STRIDE,
};
pub use ensemble::{
    ensemble_search, log_error_correlation, marginals, write_ensemble_csv, write_ensemble_csv_to, write_marginals_csv,
    EnsembleResult, EnsembleSettings, HyperGrid, HyperPoint, Marginal, ENSEMBLE_HEADER,
};
pub use loss::{assemble_loss, assemble_loss_for, regularization, LossBreakdown, LossConfig, PinnLoss};
pub use optim::{adam_run, lbfgs_run, AdamConfig, LbfgsConfig, OptimResult};
