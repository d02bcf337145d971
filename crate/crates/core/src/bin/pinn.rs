use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pinn_core::experiment::{
    emit_field_snapshots, run_convergence_study, run_ensemble, run_experiment, verify, ExperimentConfig, Scale,
};
use pinn_core::PinnError;

#[derive(Parser)]
#[command(name = "pinn", version, about = "Train physics-informed neural networks and certify their errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train, evaluate and bound one experiment.
    Run(Common),
    /// Convergence study over the `[convergence]` schedule.
    Converge(Common),
    /// Hyperparameter ensemble over the `[ensemble]` grid.
    Ensemble(Common),
    /// Evaluate a checkpoint on regular grids at given times.
    Snapshots {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to load (default: `<out>/checkpoint.json`).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Comma-separated snapshot times.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        times: Vec<f64>,
        /// Grid nodes per spatial axis.
        #[arg(long, default_value_t = 101)]
        resolution: usize,
    },
    /// Run the built-in numerical self-checks.
    Verify,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `sampling.seed`).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "desk")]
    scale: String,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, PinnError> {
        let scale: Scale = self.scale.parse()?;
        let mut cfg = ExperimentConfig::load(&self.config, scale)?;
        if let Some(s) = self.seed {
            cfg.sampling.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), PinnError> {
    match cli.command {
        Command::Run(c) => {
            let cfg = c.load()?;
            if c.workers > 0 {
                // an already initialised global pool is not an error here
                let _ = rayon::ThreadPoolBuilder::new().num_threads(c.workers).build_global();
            }
            let run = run_experiment(&cfg, Some(&cfg.output.dir))?;
            let s = &run.summary;
            println!("problem      {} ({})", s.problem, s.parameter);
            println!("reference    {}", s.reference);
            println!("E_T          {:.6e}", s.e_t_bar);
            if let (Some(g), Some(r)) = (s.e_g_bar, s.e_g_rel_bar) {
                println!("E_G          {g:.6e}");
                println!("E_G rel      {r:.4}%");
            }
            match (&s.bound, &s.bound_note) {
                (Some(b), _) => {
                    println!("bound        {:.6e} ({})", b.bound_total, b.form);
                    for w in &b.warnings {
                        println!("warning      {w}");
                    }
                }
                (None, Some(note)) => println!("bound        not computed: {note}"),
                _ => {}
            }
            println!("wrote        {}", cfg.output.dir.display());
        }
        Command::Converge(c) => {
            let cfg = c.load()?;
            let study = run_convergence_study(&cfg, c.workers, Some(&cfg.output.dir))?;
            println!("{:>8} {:>6} {:>12} {:>12} {:>12}", "n_int", "n_b", "E_T", "E_G", "bound");
            for r in &study.rows {
                println!(
                    "{:>8} {:>6} {:>12.4e} {:>12.4e} {:>12.4e}",
                    r.n_int, r.n_b, r.e_t_bar, r.e_g_bar, r.bound_total
                );
            }
            println!("wrote {}", cfg.output.dir.display());
        }
        Command::Ensemble(c) => {
            let cfg = c.load()?;
            let o = run_ensemble(&cfg, c.workers, Some(&cfg.output.dir))?;
            println!("configurations {} ({} failed)", o.completed + o.failed, o.failed);
            if let Some(best) = o.results.first() {
                println!(
                    "best           depth {} width {} q {} lambda_reg {} lambda {}: E_T {:.4e}, E_G rel {:.4}%",
                    best.config.depth,
                    best.config.width,
                    best.config.q,
                    best.config.lambda_reg,
                    best.config.lambda,
                    best.train_error,
                    best.gen_error_rel
                );
            }
            match o.log_correlation {
                Some(r) => println!("log-error correlation {r:.3}"),
                None => println!("log-error correlation undefined"),
            }
            println!("wrote {}", cfg.output.dir.display());
        }
        Command::Snapshots { common, checkpoint, times, resolution } => {
            let cfg = common.load()?;
            let problem = cfg.build_problem()?;
            let ck = checkpoint.unwrap_or_else(|| cfg.output.dir.join("checkpoint.json"));
            let files = emit_field_snapshots(&problem, &ck, &times, resolution, &cfg.output.dir.join("snapshots"))?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Verify => {
            let checks = verify::verify_all()?;
            let mut failed = 0;
            for c in &checks {
                println!("{} {:<48} {:.3e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.condition);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(PinnError::InvalidArgument(format!("{failed} check(s) failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                PinnError::Config { .. } => 2,
                PinnError::Divergence(_) => 3,
                _ => 1,
            })
        }
    }
}
