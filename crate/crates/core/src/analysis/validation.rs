use serde::{Deserialize, Serialize};

use super::errors::{training_error, TrainingErrorReport};
use crate::error::{PinnError, Result};
use crate::nn::JetSource;
use crate::problems::{residuals, ProblemSpec, ResidualBundle};
use crate::sampling::{build_training_set, QuadratureKind, SetCounts, TrainingSet};
use crate::train::{assemble_loss_for, LossBreakdown, LossConfig};

/// Seed offset between consecutive validation draws.
pub const VALIDATION_DRAW_STRIDE: u64 = 7_919;

/// Statistics of one residual component (`tb`, `sb`, `int` or `div`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub name: String,
    /// Measure of the region the component lives on.
    pub measure: f64,
    /// Training points of this component per set.
    pub n_train: usize,
    /// Average over training sets of the component training error.
    pub e_t_bar: f64,
    /// Average over training sets (and draws) of the validation error.
    pub e_v_bar: f64,
    /// `sqrt(|e_t_bar^2 - e_v_bar^2|)`, averaged over validation draws.
    pub gap: f64,
    /// `measure * std_z(mean_k |R_k(z)|^2)` over validation points `z`.
    pub residual_std: f64,
}

/// Cumulative training and validation errors over `k_sets` trained
/// networks, each with its own training draw, checked against shared
/// i.i.d. validation draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub k_sets: usize,
    pub n_draws: usize,
    pub validation_seed: u64,
    pub counts: SetCounts,
    pub components: Vec<ComponentStats>,
    /// Total training error per set.
    pub e_t: Vec<f64>,
    /// Total validation error per set, averaged over draws.
    pub e_v: Vec<f64>,
    pub e_t_bar: f64,
    pub e_v_bar: f64,
    /// `mean_draws |e_t_bar - e_v_bar(draw)|`.
    pub validation_gap: f64,
}

impl ValidationReport {
    pub fn component(&self, name: &str) -> Option<&ComponentStats> {
        self.components.iter().find(|c| c.name == name)
    }
}

fn component_names(problem: &ProblemSpec) -> Vec<&'static str> {
    if problem.is_euler() {
        vec!["tb", "sb", "int", "div"]
    } else {
        vec!["tb", "sb", "int"]
    }
}

fn component_error(r: &TrainingErrorReport, name: &str) -> f64 {
    match name {
        "tb" => r.e_tb,
        "sb" => r.e_sb,
        "int" => r.e_int,
        _ => r.e_div.unwrap_or(0.0),
    }
}

/// Per-point squared residual of a component.
fn pointwise_sq(bundle: &ResidualBundle, name: &str) -> Vec<f64> {
    let rows = |v: &[f64], w: usize| v.chunks_exact(w).map(|r| r.iter().map(|x| x * x).sum()).collect();
    match name {
        "tb" => rows(&bundle.temporal_boundary, bundle.tb_width),
        "sb" => rows(&bundle.spatial_boundary, bundle.sb_width),
        "int" => rows(&bundle.interior, bundle.interior_width),
        _ => rows(bundle.divergence.as_deref().unwrap_or(&[]), 1),
    }
}

fn component_measure(set: &TrainingSet, name: &str) -> f64 {
    match name {
        "tb" => set.temporal_boundary.total_weight(),
        "sb" => set.spatial_boundary.rule.total_weight(),
        _ => set.interior.total_weight(),
    }
}

fn component_count(set: &TrainingSet, name: &str) -> usize {
    match name {
        "tb" => set.n_tb(),
        "sb" => set.n_sb(),
        _ => set.n_int(),
    }
}

fn sample_std(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    var.sqrt()
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Builds the cumulative validation statistics of `runs`, one trained
/// network per independent training draw.
///
/// Validation points are i.i.d. uniform with the same counts as the first
/// training set. `n_draws` independent validation sets estimate the outer
/// expectation of the gap.
pub fn validation_report(
    problem: &ProblemSpec,
    runs: &[(&dyn JetSource, &TrainingSet)],
    cfg: &LossConfig,
    validation_seed: u64,
    n_draws: usize,
) -> Result<ValidationReport> {
    if runs.is_empty() {
        return Err(PinnError::InvalidArgument("validation needs at least one trained set".into()));
    }
    if n_draws == 0 {
        return Err(PinnError::InvalidArgument("n_draws must be positive".into()));
    }
    let first = runs[0].1;
    let counts = SetCounts { n_int: first.n_int(), n_sb: first.n_sb(), n_tb: first.n_tb() };
    let names = component_names(problem);

    let train: Vec<TrainingErrorReport> =
        runs.iter().map(|(p, s)| training_error(&assemble_loss_for(*p, problem, s, cfg), &problem.pde)).collect();
    let e_t: Vec<f64> = train.iter().map(|r| r.e_total).collect();
    let e_t_bar = mean(e_t.iter().copied());
    let comp_t_bar: Vec<f64> = names.iter().map(|n| mean(train.iter().map(|r| component_error(r, n)))).collect();

    let mut e_v = vec![0.0; runs.len()];
    let mut e_v_bar_draws = Vec::with_capacity(n_draws);
    let mut comp_v_bar = vec![0.0; names.len()];
    let mut comp_gap = vec![0.0; names.len()];
    let mut comp_std = vec![0.0; names.len()];
    let mut measures = vec![0.0; names.len()];
    for draw in 0..n_draws {
        let seed = validation_seed.wrapping_add(VALIDATION_DRAW_STRIDE.wrapping_mul(draw as u64));
        let val =
            build_training_set(&problem.geometry, problem.boundary.layout(), counts, QuadratureKind::MonteCarlo, seed)?;
        let mut reports = Vec::with_capacity(runs.len());
        let mut mean_sq: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (k, (params, _)) in runs.iter().enumerate() {
            let bundle = residuals(*params, problem, &val);
            let breakdown = LossBreakdown::from_bundle(&bundle, &val, cfg, 0.0);
            let report = training_error(&breakdown, &problem.pde);
            e_v[k] += report.e_total / n_draws as f64;
            for (c, name) in names.iter().enumerate() {
                let sq = pointwise_sq(&bundle, name);
                if mean_sq[c].is_empty() {
                    mean_sq[c] = vec![0.0; sq.len()];
                }
                for (m, v) in mean_sq[c].iter_mut().zip(&sq) {
                    *m += v / runs.len() as f64;
                }
            }
            reports.push(report);
        }
        let draw_total = mean(reports.iter().map(|r| r.e_total));
        e_v_bar_draws.push(draw_total);
        for (c, name) in names.iter().enumerate() {
            let v_bar = mean(reports.iter().map(|r| component_error(r, name)));
            measures[c] = component_measure(&val, name);
            comp_v_bar[c] += v_bar / n_draws as f64;
            comp_gap[c] += (comp_t_bar[c].powi(2) - v_bar.powi(2)).abs().sqrt() / n_draws as f64;
            comp_std[c] += measures[c] * sample_std(&mean_sq[c]) / n_draws as f64;
        }
    }

    let components = names
        .iter()
        .enumerate()
        .map(|(c, name)| ComponentStats {
            name: (*name).into(),
            measure: measures[c],
            n_train: component_count(first, name),
            e_t_bar: comp_t_bar[c],
            e_v_bar: comp_v_bar[c],
            gap: comp_gap[c],
            residual_std: comp_std[c],
        })
        .collect();
    Ok(ValidationReport {
        k_sets: runs.len(),
        n_draws,
        validation_seed,
        counts,
        components,
        e_v_bar: mean(e_v.iter().copied()),
        e_t,
        e_v,
        e_t_bar,
        validation_gap: mean(e_v_bar_draws.iter().map(|v| (e_t_bar - v).abs())),
    })
}
