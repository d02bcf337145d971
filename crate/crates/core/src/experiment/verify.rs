//! Self-checks of the numerical building blocks, runnable from the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{PinnError, Result};
use crate::nn::{
    forward_jet, init_params, loss_gradient, loss_value, Activation, InitScheme, InputScaling, NetworkParams,
};
use crate::problems::catalog::{burgers_rarefaction, heat_1d, heat_nd, taylor_vortex};
use crate::problems::{interior_residuals_at, Analytic, Pde, ProblemSpec};
use crate::reference::{fv_solve, FvSolver};
use crate::sampling::{
    build_training_set, empirical_rate, gauss_legendre, random_box_points, QuadratureKind, RateFit, SetCounts,
};
use crate::train::{LossConfig, PinnLoss};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition.
    pub condition: String,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, condition: format!("<= {limit:e}"), passed: value <= limit }
    }

    fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            condition: format!("{target} +- {tol}"),
            passed: (value - target).abs() <= tol,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, condition: format!(">= {limit}"), passed: value >= limit }
    }
}

/// Norm-wise relative error `max |a - b| / max |b|`.
fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Relative errors of first and second input derivatives and of the
/// parameter gradient against central differences, on seeded networks with
/// two hidden layers and `n_points` random inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeErrors {
    pub first: f64,
    pub second: f64,
    pub params: f64,
}

pub fn derivative_errors(seed: u64, n_points: usize) -> Result<DerivativeErrors> {
    let net = init_params(seed, &[3, 16, 16, 2], Activation::Tanh, InitScheme::XavierUniform)?;
    let pts = crate::sampling::uniform_random_flat(n_points, 3, seed ^ 0x5a5a);
    let h = 1e-5;
    let (mut a1, mut b1, mut a2, mut b2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for p in pts.chunks_exact(3) {
        let y: Vec<f64> = p.iter().map(|v| 2.0 * v - 1.0).collect();
        let jet = forward_jet(&net, &y)?;
        for j in 0..3 {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[j] += h;
            ym[j] -= h;
            let (vp, vm) = (net.forward(&yp)?, net.forward(&ym)?);
            let (jp, jm) = (forward_jet(&net, &yp)?, forward_jet(&net, &ym)?);
            for i in 0..2 {
                a1.push(jet.grad[i * 3 + j]);
                b1.push((vp[i] - vm[i]) / (2.0 * h));
                a2.push(jet.hess_diag[i * 3 + j]);
                b2.push((jp.grad[i * 3 + j] - jm.grad[i * 3 + j]) / (2.0 * h));
            }
        }
    }

    let problem = heat_1d()?;
    let counts = SetCounts { n_int: n_points, n_sb: n_points.div_ceil(4).max(2), n_tb: n_points.div_ceil(4).max(1) };
    let sets =
        build_training_set(&problem.geometry, problem.boundary.layout(), counts, QuadratureKind::MonteCarlo, seed)?;
    let scaling = InputScaling::from_box(&problem.geometry.lower_full(), &problem.geometry.upper_full());
    let mut params =
        init_params(seed, &[2, 16, 16, 1], Activation::Tanh, InitScheme::XavierUniform)?.with_scaling(scaling)?;
    let cfg = LossConfig { lambda_residual: 1.0, reg_exponent: 2, lambda_reg: 1e-3 };
    let objective = PinnLoss::new(&problem, &sets, cfg, params.weight_mask());
    let (_, grad) = loss_gradient(&params, &objective);
    let hp = 1e-6;
    let mut fd = Vec::with_capacity(grad.len());
    for k in 0..grad.len() {
        let orig = params.flat()[k];
        params.flat_mut()[k] = orig + hp;
        let fp = loss_value(&params, &objective);
        params.flat_mut()[k] = orig - hp;
        let fm = loss_value(&params, &objective);
        params.flat_mut()[k] = orig;
        fd.push((fp - fm) / (2.0 * hp));
    }
    Ok(DerivativeErrors { first: rel_err(&a1, &b1), second: rel_err(&a2, &b2), params: rel_err(&grad, &fd) })
}

/// Largest interior residual of the exact solution at `n` random points.
pub fn exact_residual(problem: &ProblemSpec, n: usize, seed: u64) -> f64 {
    let exact = problem.exact.as_ref().expect("problem has an exact solution");
    let pts = random_box_points(&problem.geometry, n, seed);
    interior_residuals_at(&Analytic(exact.as_ref()), problem, &pts).iter().fold(0.0, |m, r| m.max(r.abs()))
}

/// Root-mean-square of the momentum and divergence residuals of an Euler
/// network at `n` random interior points. Momentum components are pooled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerResidualRms {
    pub momentum: f64,
    pub divergence: f64,
}

pub fn euler_residual_rms(problem: &ProblemSpec, net: &NetworkParams, n: usize, seed: u64) -> Result<EulerResidualRms> {
    if !matches!(problem.pde, Pde::Euler { .. }) {
        return Err(PinnError::InvalidArgument(format!("{} is not an Euler problem", problem.name)));
    }
    let pts = random_box_points(&problem.geometry, n, seed);
    let r = interior_residuals_at(net, problem, &pts);
    let k = problem.interior_components();
    let (mut mom, mut div) = (0.0, 0.0);
    for c in r.chunks_exact(k) {
        mom += c[0] * c[0] + c[1] * c[1];
        div += c[2] * c[2];
    }
    let n = (r.len() / k) as f64;
    Ok(EulerResidualRms { momentum: (mom / (2.0 * n)).sqrt(), divergence: (div / n).sqrt() })
}

/// Largest relative error of `n`-node Gauss-Legendre rules on monomials of
/// degree up to `2n - 1` over `[0, 1]`, for `n` in `1..=max_nodes`.
pub fn gauss_exactness(max_nodes: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 1..=max_nodes {
        let (x, w) = gauss_legendre(n);
        for k in 0..2 * n {
            let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| 0.5 * wi * (0.5 * (xi + 1.0)).powi(k as i32)).sum();
            let exact = 1.0 / (k + 1) as f64;
            worst = worst.max((approx - exact).abs() / exact);
        }
    }
    worst
}

fn smooth(p: &[f64]) -> f64 {
    (p[0] + p[1]).exp() * (1.0 + 0.5 * (3.0 * p[0] * p[1]).cos())
}

fn smooth_exact() -> f64 {
    // exp(x + y) integrates to (e - 1)^2; the cosine part by a 2D Gauss rule
    let (x, w) = gauss_legendre(40);
    let mut c = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            let (a, b) = (0.5 * (xi + 1.0), 0.5 * (yj + 1.0));
            c += 0.25 * wi * wj * (a + b).exp() * 0.5 * (3.0 * a * b).cos();
        }
    }
    (1f64.exp() - 1.0).powi(2) + c
}

pub fn monte_carlo_rate(seed: u64) -> Result<RateFit> {
    let ns: Vec<usize> = (6..=14).step_by(2).map(|k| 1 << k).collect();
    empirical_rate(QuadratureKind::MonteCarlo, 2, smooth, smooth_exact(), &ns, 64, seed)
}

pub fn sobol_rate() -> Result<RateFit> {
    let ns: Vec<usize> = (6..=16).step_by(2).map(|k| 1 << k).collect();
    empirical_rate(QuadratureKind::Sobol, 2, smooth, smooth_exact(), &ns, 1, 0)
}

/// L1 errors of the inviscid rarefaction at `t = 0.5` for each cell count
/// and the fitted rate.
pub fn fv_rarefaction_rate(cells: &[usize], cfl: f64) -> Result<RateFit> {
    let spec = burgers_rarefaction(0.0)?;
    let mut errors = Vec::with_capacity(cells.len());
    for &n in cells {
        let g = fv_solve(&spec, n, 0.5, cfl)?;
        let last = g.cell_averages.last().expect("at least one slice");
        let t = g.t_end;
        errors.push(
            last.iter().enumerate().map(|(i, u)| (u - (g.cell_center(i) / t).clamp(0.0, 1.0)).abs() * g.dx).sum(),
        );
    }
    Ok(RateFit { ns: cells.to_vec(), alpha: crate::sampling::fit_rate(cells, &errors), errors })
}

/// Largest per-step mismatch between the mass change and the boundary
/// inflow over `steps` steps of the inviscid rarefaction.
pub fn fv_conservation_drift(cells: usize, steps: usize) -> Result<f64> {
    let spec = burgers_rarefaction(0.0)?;
    let mut s = FvSolver::new(&spec, cells)?;
    let dt = s.stable_dt(0.4);
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let m0 = s.mass();
        s.step(dt);
        worst = worst.max((s.mass() - m0 - dt * s.boundary_inflow()).abs());
    }
    Ok(worst)
}

/// Runs every check.
pub fn verify_all() -> Result<Vec<Check>> {
    let d = derivative_errors(7, 100)?;
    let mut checks = vec![
        Check::at_most("jet first derivatives vs finite differences", d.first, 1e-5),
        Check::at_most("jet second derivatives vs finite differences", d.second, 1e-4),
        Check::at_most("loss gradient vs finite differences", d.params, 1e-5),
        Check::at_most("heat 1d exact residual", exact_residual(&heat_1d()?, 1000, 1), 1e-8),
        Check::at_most("heat 5d exact residual", exact_residual(&heat_nd(5)?, 1000, 2), 1e-8),
        Check::at_most("taylor vortex exact residual", exact_residual(&taylor_vortex(4.0, 0.0)?, 1000, 3), 1e-8),
        Check::at_most("gauss-legendre exactness", gauss_exactness(20), 1e-12),
        Check::within("monte carlo rate", monte_carlo_rate(5)?.alpha, 0.5, 0.15),
        Check::at_least("sobol rate", sobol_rate()?.alpha, 0.9),
        Check::within("finite-volume rarefaction rate", fv_rarefaction_rate(&[512, 1024, 2048], 0.4)?.alpha, 1.0, 0.3),
    ];
    checks.push(Check::at_most("finite-volume conservation per step", fv_conservation_drift(1024, 2000)?, 1e-10));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in verify_all().unwrap() {
            assert!(c.passed, "{}: {} (want {})", c.name, c.value, c.condition);
        }
    }

    #[test]
    fn euler_rms_splits_components() {
        let tv = taylor_vortex(4.0, 0.0).unwrap();
        let net = crate::train::init_network(
            &tv,
            &crate::train::Architecture { depth: 2, width: 8, activation: Activation::Celu },
            1,
        )
        .unwrap();
        let r = euler_residual_rms(&tv, &net, 200, 4).unwrap();
        assert!(r.momentum > 0.0 && r.divergence > 0.0);
        assert!(euler_residual_rms(&heat_1d().unwrap(), &net, 10, 4).is_err());
    }

    #[test]
    fn rel_err_is_normwise() {
        assert_eq!(rel_err(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert!((rel_err(&[1.1, 2.0], &[1.0, 2.0]) - 0.05).abs() < 1e-12);
        assert_eq!(rel_err(&[1.1, 0.0], &[1.0, 2.0]), 1.0);
    }
}
