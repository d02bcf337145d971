//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Set `PINN_ACCEPTANCE=4,6` to run a subset.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pinn_core::experiment::verify::{self, euler_residual_rms};
use pinn_core::experiment::{run_convergence_study, run_ensemble, run_experiment, ExperimentConfig, Scale};
use pinn_core::problems::catalog::{heat_1d, heat_nd, taylor_vortex};
use pinn_core::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn preset(name: &str) -> Result<ExperimentConfig> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(format!("{name}.toml"));
    ExperimentConfig::load(&path, Scale::Desk)
}

fn rel_error(name: &str) -> Result<f64> {
    let run = run_experiment(&preset(name)?, None)?;
    Ok(run.summary.e_g_rel_bar.unwrap_or(f64::INFINITY))
}

fn derivatives() -> Result<Outcome> {
    let d = verify::derivative_errors(7, 100)?;
    outcome(
        d.first <= 1e-5 && d.second <= 1e-4 && d.params <= 1e-5,
        format!("first {:.2e}, second {:.2e}, params {:.2e}", d.first, d.second, d.params),
    )
}

fn residuals() -> Result<Outcome> {
    let r = [
        verify::exact_residual(&heat_1d()?, 1000, 1),
        verify::exact_residual(&heat_nd(5)?, 1000, 2),
        verify::exact_residual(&taylor_vortex(4.0, 0.0)?, 1000, 3),
    ];
    outcome(
        r.iter().all(|&v| v <= 1e-8),
        format!("heat 1d {:.2e}, heat 5d {:.2e}, taylor vortex {:.2e}", r[0], r[1], r[2]),
    )
}

fn quadrature() -> Result<Outcome> {
    let g = verify::gauss_exactness(20);
    let mc = verify::monte_carlo_rate(5)?.alpha;
    let qmc = verify::sobol_rate()?.alpha;
    outcome(
        g <= 1e-12 && (mc - 0.5).abs() <= 0.15 && qmc >= 0.9,
        format!("gauss {g:.2e}, monte carlo rate {mc:.3}, sobol rate {qmc:.3}"),
    )
}

fn heat_training() -> Result<Outcome> {
    let e = rel_error("heat_1d")?;
    outcome(e <= 1.0, format!("E_G rel {e:.4}% (limit 1%)"))
}

fn heat_nd_training() -> Result<Outcome> {
    let e = rel_error("heat_nd_5")?;
    outcome(e <= 2.0, format!("E_G rel {e:.4}% (limit 2%)"))
}

fn burgers() -> Result<Outcome> {
    let rare = rel_error("burgers_rarefaction")?;
    let shock = rel_error("burgers_shock")?;
    let inviscid = rel_error("burgers_sine_inviscid")?;
    outcome(
        rare <= 5.0 && shock <= 5.0 && inviscid >= 3.0 * rare,
        format!(
            "rarefaction {rare:.3}%, shock nu=0.01/pi {shock:.3}%, inviscid sine {inviscid:.3}% ({:.1}x)",
            inviscid / rare
        ),
    )
}

fn bound_validity() -> Result<Outcome> {
    let study = run_convergence_study(&preset("heat_1d_convergence")?, 0, None)?;
    let rows = &study.rows;
    let covered = rows.iter().all(|r| r.bound_total >= r.e_g_bar);
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let decreasing = last.e_g_bar < first.e_g_bar && last.bound_total < first.bound_total;
    let table: Vec<String> =
        rows.iter().map(|r| format!("N_b={} E_G={:.2e} bound={:.2e}", r.n_b, r.e_g_bar, r.bound_total)).collect();
    outcome(covered && decreasing, table.join("; "))
}

fn correlation() -> Result<Outcome> {
    let o = run_ensemble(&preset("heat_1d_ensemble")?, 0, None)?;
    let r = o.log_correlation.unwrap_or(f64::NAN);
    outcome(
        o.completed == 24 && r >= 0.5,
        format!("{} of 24 configurations completed, log-error correlation {r:.3}", o.completed),
    )
}

fn finite_volume() -> Result<Outcome> {
    let rate = verify::fv_rarefaction_rate(&[512, 1024, 2048], 0.4)?.alpha;
    let drift = verify::fv_conservation_drift(1024, 2000)?;
    outcome(
        (rate - 1.0).abs() <= 0.3 && drift <= 1e-10,
        format!("L1 rate {rate:.3}, conservation drift {drift:.2e} per step"),
    )
}

fn taylor_vortex_training() -> Result<Outcome> {
    let run = run_experiment(&preset("taylor_vortex")?, None)?;
    let e = run.summary.e_g_rel_bar.unwrap_or(f64::INFINITY);
    let rms = euler_residual_rms(&run.problem, &run.networks[0], 20000, 11)?;
    let smoke = run_experiment(&preset("double_shear_layer")?, None)?;
    let smoke_ok = smoke.summary.e_t_bar.is_finite();
    outcome(
        e <= 5.0 && rms.divergence <= 10.0 * rms.momentum && smoke_ok,
        format!(
            "E_G rel {e:.3}%, divergence rms {:.2e} vs momentum rms {:.2e}, shear layer smoke E_T {:.2e}",
            rms.divergence, rms.momentum, smoke.summary.e_t_bar
        ),
    )
}

type Criterion = (u32, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let min = |m: u64| Duration::from_secs(60 * m);
    let criteria: [Criterion; 10] = [
        (1, Duration::from_secs(10), derivatives),
        (2, Duration::from_secs(5), residuals),
        (3, Duration::from_secs(60), quadrature),
        (4, min(10), heat_training),
        (5, min(20), heat_nd_training),
        // three runs, each within 30 minutes
        (6, min(90), burgers),
        (7, min(45), bound_validity),
        (8, min(90), correlation),
        (9, Duration::from_secs(60), finite_volume),
        (10, min(45), taylor_vortex_training),
    ];
    let only: Option<Vec<u32>> =
        std::env::var("PINN_ACCEPTANCE").ok().map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());

    let mut failed = 0;
    for (id, budget, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "criterion {id}: {} {detail} ({:.1}s of {}s)",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
