use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::errors::{problem_generalization_error, training_error};
use super::sup::{sup_gradient_entry, sup_output, sup_spatial_gradient, sup_value, Reference};
use super::validation::ValidationReport;
use crate::error::{PinnError, Result};
use crate::nn::JetSource;
use crate::problems::{Analytic, Pde, ProblemSpec};
use crate::sampling::{build_training_set, random_box_points, BoundaryLayout, QuadratureKind, SetCounts, TrainingSet};
use crate::train::{assemble_loss_for, LossConfig};

/// Sampling budget for the sup-norm constants and the measured error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundOptions {
    #[serde(default = "n_boundary")]
    pub n_boundary: usize,
    #[serde(default = "n_interior")]
    pub n_interior: usize,
    #[serde(default = "n_test")]
    pub n_test: usize,
    #[serde(default)]
    pub seed: u64,
    /// Time slices of the `u_x` growth profile (conservation laws).
    #[serde(default = "profile_slices")]
    pub profile_slices: usize,
}

fn n_boundary() -> usize {
    10_000
}
fn n_interior() -> usize {
    100_000
}
fn n_test() -> usize {
    100_000
}
fn profile_slices() -> usize {
    10
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            n_boundary: n_boundary(),
            n_interior: n_interior(),
            n_test: n_test(),
            seed: 0,
            profile_slices: profile_slices(),
        }
    }
}

/// One additive term of a bound on the squared generalization error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub name: String,
    pub value: f64,
}

/// A computed a posteriori error bound and its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: String,
    /// `random_points` (includes validation gaps and residual spread) or
    /// `training_error_part` (quadrature terms omitted).
    pub form: String,
    pub constants: BTreeMap<String, f64>,
    pub terms: Vec<BoundTerm>,
    /// Sum of the terms: a bound on the squared error.
    pub bound_squared: f64,
    /// `sqrt(bound_squared)`, comparable with `measured_e_g`.
    pub bound_total: f64,
    pub measured_e_g: Option<f64>,
    pub measured_e_g_rel: Option<f64>,
    /// `(t, sup_x |u_x(t, x)|)` of the truth (conservation laws).
    pub ux_profile: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl BoundReport {
    fn assemble(family: &str, form: &str, constants: BTreeMap<String, f64>, terms: Vec<(&str, f64)>) -> Self {
        let terms: Vec<BoundTerm> = terms.into_iter().map(|(n, v)| BoundTerm { name: n.into(), value: v }).collect();
        let bound_squared = terms.iter().map(|t| t.value).sum::<f64>();
        Self {
            family: family.into(),
            form: form.into(),
            constants,
            terms,
            bound_squared,
            bound_total: bound_squared.sqrt(),
            measured_e_g: None,
            measured_e_g_rel: None,
            ux_profile: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn boundary_points(problem: &ProblemSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    let counts = SetCounts { n_int: 1, n_sb: n, n_tb: 1 };
    let set = build_training_set(&problem.geometry, BoundaryLayout::Faces, counts, QuadratureKind::MonteCarlo, seed)?;
    Ok(set.spatial_boundary.rule.points)
}

/// `sup |u| + sup |grad_x u|` over `points`.
fn c1_norm(source: &dyn Reference, points: &[f64], k: usize) -> f64 {
    sup_value(source, points, k) + sup_spatial_gradient(source, points, k)
}

fn exp_prefactor(t: f64, c: f64) -> f64 {
    t + c * t * t * (c * t).exp()
}

fn check_family(problem: &ProblemSpec, family: &str) -> Result<()> {
    if problem.pde.family() != family {
        return Err(PinnError::InvalidArgument(format!("expected a {family} problem, got {}", problem.pde.family())));
    }
    Ok(())
}

/// Bound for the heat equation trained on random points, averaged over
/// `runs` (one trained network per independent training draw).
///
/// The squared bound is
/// `C1^2 (Et_tb^2 + gap_tb^2 + Et_int^2 + gap_int^2 + C2^2 (Et_sb + gap_sb))
///  + C1^2 (std_tb / N_tb^(1/2) + std_int / N_int^(1/2) + C2^2 std_sb^(1/2) / N_sb^(1/4))`
/// with `C1 = sqrt(T + (1 + 2 C_f) T^2 exp((1 + 2 C_f) T))`,
/// `C2 = sqrt(C_dD T^(1/2))` and
/// `C_dD = |dD|^(1/2) (||u||_C1 + ||u*||_C1)` on the lateral boundary.
pub fn heat_bound(
    problem: &ProblemSpec,
    runs: &[(&dyn Reference, &TrainingSet)],
    validation: &ValidationReport,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    check_family(problem, "heat")?;
    let Pde::Heat { source } = &problem.pde else { unreachable!() };
    if runs.is_empty() {
        return Err(PinnError::InvalidArgument("heat bound needs at least one trained set".into()));
    }
    if let Some((_, s)) = runs.iter().find(|(_, s)| s.kind != QuadratureKind::MonteCarlo) {
        return Err(PinnError::NotRandom(format!(
            "the random-points bound needs Monte-Carlo training sets, got {}",
            s.kind
        )));
    }
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| PinnError::InvalidArgument("heat bound needs an exact solution".into()))?;
    let truth = Analytic(exact.as_ref());
    let t = problem.t_final();
    let c_f = source.lipschitz;
    let c1 = exp_prefactor(t, 1.0 + 2.0 * c_f).sqrt();

    let bpts = boundary_points(problem, opts.n_boundary, opts.seed)?;
    let u_c1 = c1_norm(&truth, &bpts, 1);
    let net_c1 = runs.iter().map(|(n, _)| c1_norm(*n, &bpts, 1)).fold(0.0, f64::max);
    let c_dd = problem.geometry.boundary_measure().sqrt() * (u_c1 + net_c1);
    let c2 = (c_dd * t.sqrt()).sqrt();

    let comp = |name: &str| {
        validation
            .component(name)
            .ok_or_else(|| PinnError::InvalidArgument(format!("validation report lacks component {name}")))
    };
    let (tb, sb, int) = (comp("tb")?, comp("sb")?, comp("int")?);
    let a = c1 * c1;
    let b = a * c2 * c2;
    let terms = vec![
        ("tb", a * tb.e_t_bar.powi(2)),
        ("gap_tb", a * tb.gap.powi(2)),
        ("int", a * int.e_t_bar.powi(2)),
        ("gap_int", a * int.gap.powi(2)),
        ("sb", b * sb.e_t_bar),
        ("gap_sb", b * sb.gap),
        ("std_tb", a * tb.residual_std / (tb.n_train as f64).sqrt()),
        ("std_int", a * int.residual_std / (int.n_train as f64).sqrt()),
        ("std_sb", b * sb.residual_std.sqrt() / (sb.n_train as f64).powf(0.25)),
    ];
    let constants = BTreeMap::from([
        ("C_f".to_string(), c_f),
        ("C1".to_string(), c1),
        ("C2".to_string(), c2),
        ("C_dD".to_string(), c_dd),
        ("u_C1_boundary".to_string(), u_c1),
        ("net_C1_boundary".to_string(), net_c1),
    ]);
    let mut report = BoundReport::assemble("heat", "random_points", constants, terms);
    let mut e_g = 0.0;
    let mut e_rel = 0.0;
    for (net, _) in runs {
        let g = problem_generalization_error(problem, *net, &truth, opts.n_test, opts.seed)?;
        e_g += g.e_g / runs.len() as f64;
        e_rel += g.e_g_rel / runs.len() as f64;
    }
    report.measured_e_g = Some(e_g);
    report.measured_e_g_rel = Some(e_rel);
    Ok(report)
}

/// Training-error part of the bound for a 1D viscous scalar conservation
/// law on `[x_0, x_1]`:
/// `(T + C T^2 e^(CT)) [Et_tb^2 + Et_int^2 + 2 Cb_bar (Et_sb0^2 + Et_sb1^2)
///  + 2 nu C_b T^(1/2) (Et_sb0 + Et_sb1)]`
/// with `C = 1 + 2 |f''(max(||u||, ||u*||))| ||u_x||`,
/// `C_b = ||u_x|| + ||u*_x||` and `Cb_bar = sup_{|s| <= ||u*||} |f'(s)|`.
pub fn burgers_bound(
    problem: &ProblemSpec,
    net: &dyn Reference,
    sets: &TrainingSet,
    reference: &dyn Reference,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    check_family(problem, "conservation_law")?;
    if problem.spatial_dim() != 1 {
        return Err(PinnError::UnsupportedDimension { dim: problem.spatial_dim(), max: 1 });
    }
    let flux = problem.flux().unwrap();
    let nu = problem.nu();
    let t = problem.t_final();
    let pts = random_box_points(&problem.geometry, opts.n_interior, opts.seed);

    let u_sup = sup_value(reference, &pts, 1);
    let ux_sup = sup_spatial_gradient(reference, &pts, 1);
    let net_sup = sup_value(net, &pts, 1);
    let net_ux_sup = sup_spatial_gradient(net, &pts, 1);
    let c_fuu = (flux.f_second)(u_sup.max(net_sup)).abs() * ux_sup;
    let c = 1.0 + 2.0 * c_fuu;
    let c_b = ux_sup + net_ux_sup;
    let c_b_bar = (0..=400).map(|i| (flux.f_prime)(net_sup * (2.0 * i as f64 / 400.0 - 1.0)).abs()).fold(0.0, f64::max);

    let tr = training_error(&assemble_loss_for(net, problem, sets, &LossConfig::default()), &problem.pde);
    let (sb0, sb1) = (tr.e_sb0.unwrap_or(0.0), tr.e_sb1.unwrap_or(0.0));
    let p = exp_prefactor(t, c);
    let terms = vec![
        ("tb", p * tr.e_tb.powi(2)),
        ("int", p * tr.e_int.powi(2)),
        ("sb_sq", p * 2.0 * c_b_bar * (sb0 * sb0 + sb1 * sb1)),
        ("sb_viscous", p * 2.0 * nu * c_b * t.sqrt() * (sb0 + sb1)),
    ];
    let constants = BTreeMap::from([
        ("C".to_string(), c),
        ("C_f_u_ustar".to_string(), c_fuu),
        ("C_b".to_string(), c_b),
        ("C_b_bar".to_string(), c_b_bar),
        ("prefactor".to_string(), p),
        ("u_sup".to_string(), u_sup),
        ("u_x_sup".to_string(), ux_sup),
        ("net_sup".to_string(), net_sup),
        ("net_u_x_sup".to_string(), net_ux_sup),
    ]);
    let mut report = BoundReport::assemble("conservation_law", "training_error_part", constants, terms);
    report.ux_profile = ux_profile(problem, reference, opts.profile_slices);
    let final_ux = report.ux_profile.last().map_or(0.0, |p| p.1);
    if nu == 0.0 && has_jump(problem, reference, final_ux) {
        report.warnings.push("constants unreliable: ||u_x||_inf diverges for a discontinuous inviscid solution".into());
    }
    if !report.bound_total.is_finite() {
        report.warnings.push("bound overflowed: the stability constant is too large".into());
    }
    let g = problem_generalization_error(problem, net, reference, opts.n_test, opts.seed)?;
    report.measured_e_g = Some(g.e_g);
    report.measured_e_g_rel = Some(g.e_g_rel);
    Ok(report)
}

const PROFILE_X: usize = 2001;

fn slice_points(problem: &ProblemSpec, t: f64) -> Vec<f64> {
    let (lo, hi) = (problem.geometry.lower[0], problem.geometry.upper[0]);
    (0..PROFILE_X).flat_map(|i| [t, lo + (hi - lo) * i as f64 / (PROFILE_X - 1) as f64]).collect()
}

/// `sup_x |u_x|` at `slices` equispaced positive times up to `T`.
pub fn ux_profile(problem: &ProblemSpec, reference: &dyn Reference, slices: usize) -> Vec<(f64, f64)> {
    let t_final = problem.t_final();
    (1..=slices)
        .map(|j| {
            let t = t_final * j as f64 / slices as f64;
            (t, sup_spatial_gradient(reference, &slice_points(problem, t), 1))
        })
        .collect()
}

/// True if the truth at the final time has a front narrower than 1% of the
/// domain, i.e. a resolved shock.
fn has_jump(problem: &ProblemSpec, reference: &dyn Reference, final_ux: f64) -> bool {
    let u = reference.eval(&slice_points(problem, problem.t_final()));
    let osc = u.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - u.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let width = problem.geometry.width(0);
    osc > 0.0 && final_ux * width > 100.0 * osc
}

/// Training-error part of the bound for 2D incompressible Euler:
/// `(T + C_inf T^2 e^(C_inf T)) [Et_tb^2 + Et_u^2 + C0 T^(1/2) (Et_div + Et_sb)]`
/// with `C_inf = 1 + 2 d max_{i,j} ||d_j u_i||` and
/// `C0 = 2 max(|D|^(1/2), |dD|^(1/2)) (0.5 (||u|| + ||u*||)^2 + ||p|| + ||p*||)`.
pub fn euler_bound(
    problem: &ProblemSpec,
    net: &dyn Reference,
    sets: &TrainingSet,
    truth: &dyn Reference,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    check_family(problem, "euler")?;
    let d = problem.spatial_dim();
    let t = problem.t_final();
    let pts = random_box_points(&problem.geometry, opts.n_interior, opts.seed);
    let grad_sup = sup_gradient_entry(truth, &pts, d);
    let c_inf = 1.0 + 2.0 * d as f64 * grad_sup;
    let u_sup = sup_value(truth, &pts, d);
    let net_sup = sup_value(net, &pts, d);
    let mut warnings = Vec::new();
    let p_sup = if JetSource::output_dim(truth) > d {
        sup_output(truth, &pts, d)
    } else {
        warnings.push("truth carries no pressure; ||p|| taken as 0".to_string());
        0.0
    };
    let net_p_sup = sup_output(net, &pts, d);
    let geom = &problem.geometry;
    let c0 = 2.0
        * geom.spatial_volume().sqrt().max(geom.boundary_measure().sqrt())
        * (0.5 * (u_sup + net_sup).powi(2) + p_sup + net_p_sup);

    let tr = training_error(&assemble_loss_for(net, problem, sets, &LossConfig::default()), &problem.pde);
    let p = exp_prefactor(t, c_inf);
    let terms = vec![
        ("tb", p * tr.e_tb.powi(2)),
        ("int", p * tr.e_int.powi(2)),
        ("div", p * c0 * t.sqrt() * tr.e_div.unwrap_or(0.0)),
        ("sb", p * c0 * t.sqrt() * tr.e_sb),
    ];
    let constants = BTreeMap::from([
        ("C_inf".to_string(), c_inf),
        ("C0".to_string(), c0),
        ("C_d".to_string(), d as f64),
        ("prefactor".to_string(), p),
        ("grad_u_sup".to_string(), grad_sup),
        ("u_sup".to_string(), u_sup),
        ("net_u_sup".to_string(), net_sup),
        ("p_sup".to_string(), p_sup),
        ("net_p_sup".to_string(), net_p_sup),
    ]);
    let mut report = BoundReport::assemble("euler", "training_error_part", constants, terms);
    report.warnings = warnings;
    let g = problem_generalization_error(problem, net, truth, opts.n_test, opts.seed)?;
    report.measured_e_g = Some(g.e_g);
    report.measured_e_g_rel = Some(g.e_g_rel);
    Ok(report)
}
