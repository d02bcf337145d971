//! Configuration-driven experiments: single runs, convergence studies,
//! ensembles, field snapshots and self-checks.

mod config;
mod convergence;
mod ensemble;
mod run;
mod snapshots;
pub mod verify;

pub use config::{
    set_seed, ArchitectureConfig, ConvergenceConfig, EvaluationConfig, ExperimentConfig, OptimizerChoice,
    OptimizerSection, OutputConfig, ProblemConfig, SamplingConfig, Scale, SET_SEED_STRIDE,
};
pub use convergence::{run_convergence_study, ConvergenceRun, ConvergenceStudy, RUNS_HEADER};
pub use ensemble::{run_ensemble, EnsembleOutcome};
pub use run::{run_experiment, ExperimentRun, RunSummary, SetOutcome, Truth, RESULTS_HEADER};
pub use snapshots::{emit_field_snapshots, emit_snapshots, snapshot_header};

mod pool {
    use crate::error::{PinnError, Result};

    /// Runs `f` on a pool of `workers` threads, or on the global pool when
    /// `workers` is 0.
    pub fn install<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
        if workers == 0 {
            return Ok(f());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| PinnError::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}
