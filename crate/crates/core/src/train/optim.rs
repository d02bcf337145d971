use serde::{Deserialize, Serialize};

use crate::error::{PinnError, Result};

/// Result of an optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub theta: Vec<f64>,
    pub value: f64,
    /// Objective value at every accepted iterate, starting with `theta0`.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub grad_norm: f64,
    /// Set when L-BFGS stopped because the line search failed.
    pub line_search_failed: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(value: f64, grad: &[f64], iteration: usize) -> Result<()> {
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(PinnError::Divergence(format!("non-finite loss {value} at iteration {iteration}")));
    }
    Ok(())
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub steps: usize,
    pub learning_rate: f64,
    #[serde(default = "beta1")]
    pub beta1: f64,
    #[serde(default = "beta2")]
    pub beta2: f64,
    #[serde(default = "eps")]
    pub epsilon: f64,
}

fn beta1() -> f64 {
    0.9
}
fn beta2() -> f64 {
    0.999
}
fn eps() -> f64 {
    1e-8
}

impl AdamConfig {
    pub fn new(steps: usize, learning_rate: f64) -> Self {
        Self { steps, learning_rate, beta1: beta1(), beta2: beta2(), epsilon: eps() }
    }
}

/// Full-batch Adam. Returns the final iterate.
pub fn adam_run<F>(mut f: F, theta0: &[f64], cfg: &AdamConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = theta0.len();
    let mut theta = theta0.to_vec();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut history = Vec::with_capacity(cfg.steps + 1);
    let (mut b1t, mut b2t) = (1.0, 1.0);
    for step in 0..cfg.steps {
        let (value, grad) = f(&theta);
        check_finite(value, &grad, step)?;
        history.push(value);
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        for i in 0..n {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let mhat = m[i] / (1.0 - b1t);
            let vhat = v[i] / (1.0 - b2t);
            theta[i] -= cfg.learning_rate * mhat / (vhat.sqrt() + cfg.epsilon);
        }
    }
    let (value, grad) = f(&theta);
    check_finite(value, &grad, cfg.steps)?;
    history.push(value);
    Ok(OptimResult {
        theta,
        value,
        history,
        iterations: cfg.steps,
        evaluations: cfg.steps + 1,
        grad_norm: norm(&grad),
        line_search_failed: false,
    })
}

/// L-BFGS hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LbfgsConfig {
    pub max_iters: usize,
    #[serde(default = "history_size")]
    pub history_size: usize,
    /// Stop when the gradient norm falls below this.
    #[serde(default = "tolerance")]
    pub tolerance: f64,
    #[serde(default = "c1")]
    pub c1: f64,
    #[serde(default = "c2")]
    pub c2: f64,
    /// Function evaluations allowed per line search.
    #[serde(default = "max_line_search")]
    pub max_line_search: usize,
}

fn history_size() -> usize {
    50
}
fn tolerance() -> f64 {
    1e-10
}
fn c1() -> f64 {
    1e-4
}
fn c2() -> f64 {
    0.9
}
fn max_line_search() -> usize {
    25
}

impl LbfgsConfig {
    pub fn new(max_iters: usize) -> Self {
        Self {
            max_iters,
            history_size: history_size(),
            tolerance: tolerance(),
            c1: c1(),
            c2: c2(),
            max_line_search: max_line_search(),
        }
    }
}

struct LineSearch<'a, F> {
    f: &'a mut F,
    x: &'a [f64],
    p: &'a [f64],
    phi0: f64,
    dphi0: f64,
    c1: f64,
    c2: f64,
    evals: usize,
    max_evals: usize,
    trial: Vec<f64>,
}

struct Trial {
    alpha: f64,
    phi: f64,
    dphi: f64,
    grad: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> LineSearch<'_, F> {
    fn eval(&mut self, alpha: f64) -> Trial {
        for i in 0..self.x.len() {
            self.trial[i] = self.x[i] + alpha * self.p[i];
        }
        let (mut phi, grad) = (self.f)(&self.trial);
        self.evals += 1;
        let mut dphi = dot(&grad, self.p);
        if !phi.is_finite() || !dphi.is_finite() {
            phi = f64::INFINITY;
            dphi = f64::INFINITY;
        }
        Trial { alpha, phi, dphi, grad }
    }

    /// Sufficient decrease. Near a minimum the decrease drops below the
    /// rounding level of `phi`; a step that keeps `phi` within a few ulps is
    /// then judged by its slope instead (approximate Wolfe condition).
    fn armijo(&self, t: &Trial) -> bool {
        let noise = 16.0 * f64::EPSILON * self.phi0.abs();
        t.phi <= self.phi0 + self.c1 * t.alpha * self.dphi0
            || (t.phi <= self.phi0 + noise && t.dphi <= (2.0 * self.c1 - 1.0) * self.dphi0)
    }

    fn curvature(&self, t: &Trial) -> bool {
        t.dphi.abs() <= -self.c2 * self.dphi0
    }

    /// Minimiser of the cubic through two trials, safeguarded into the
    /// interior of the bracket.
    fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
        let (a, b) = (lo.alpha, hi.alpha);
        let d1 = lo.dphi + hi.dphi - 3.0 * (lo.phi - hi.phi) / (a - b);
        let disc = d1 * d1 - lo.dphi * hi.dphi;
        let mut x = f64::NAN;
        if disc >= 0.0 && hi.phi.is_finite() && hi.dphi.is_finite() {
            let d2 = (b - a).signum() * disc.sqrt();
            x = b - (b - a) * (hi.dphi + d2 - d1) / (hi.dphi - lo.dphi + 2.0 * d2);
        }
        let (l, h) = if a < b { (a, b) } else { (b, a) };
        let margin = 0.1 * (h - l);
        if !x.is_finite() || x < l + margin || x > h - margin {
            x = 0.5 * (a + b);
        }
        x
    }

    fn zoom(&mut self, mut lo: Trial, mut hi: Trial) -> std::result::Result<Trial, Option<Trial>> {
        while self.evals < self.max_evals {
            let alpha = Self::interpolate(&lo, &hi);
            let t = self.eval(alpha);
            if !self.armijo(&t) || t.phi >= lo.phi {
                hi = t;
            } else {
                if self.curvature(&t) {
                    return Ok(t);
                }
                if t.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
            if (hi.alpha - lo.alpha).abs() <= 1e-16 * lo.alpha.abs().max(1e-300) {
                break;
            }
        }
        // best point with sufficient decrease, if any
        Err((lo.alpha > 0.0 && self.armijo(&lo)).then_some(lo))
    }

    /// Strong-Wolfe search. `Err(Some(t))` is a point that only satisfies
    /// sufficient decrease.
    fn search(&mut self, alpha0: f64) -> std::result::Result<Trial, Option<Trial>> {
        let mut prev = Trial { alpha: 0.0, phi: self.phi0, dphi: self.dphi0, grad: Vec::new() };
        let mut alpha = alpha0;
        let mut first = true;
        while self.evals < self.max_evals {
            let t = self.eval(alpha);
            if !self.armijo(&t) || (!first && t.phi >= prev.phi) {
                return self.zoom(prev, t);
            }
            if self.curvature(&t) {
                return Ok(t);
            }
            if t.dphi >= 0.0 {
                return self.zoom(t, prev);
            }
            alpha = 2.0 * t.alpha;
            prev = t;
            first = false;
        }
        Err((prev.alpha > 0.0).then_some(prev))
    }
}

/// Limited-memory BFGS with a strong-Wolfe line search.
pub fn lbfgs_run<F>(mut f: F, theta0: &[f64], cfg: &LbfgsConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = theta0.len();
    let mut x = theta0.to_vec();
    let (mut fx, mut g) = f(&x);
    check_finite(fx, &g, 0)?;
    let mut evaluations = 1;
    let mut history = vec![fx];
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut line_search_failed = false;
    let mut p = vec![0.0; n];
    let mut alpha_buf = vec![0.0; cfg.history_size.max(1)];
    while iterations < cfg.max_iters && norm(&g) > cfg.tolerance {
        // two-loop recursion
        p.copy_from_slice(&g);
        let k = s_hist.len();
        for i in (0..k).rev() {
            alpha_buf[i] = rho[i] * dot(&s_hist[i], &p);
            for (pj, yj) in p.iter_mut().zip(&y_hist[i]) {
                *pj -= alpha_buf[i] * yj;
            }
        }
        if k > 0 {
            let gamma = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1]);
            p.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..k {
            let beta = rho[i] * dot(&y_hist[i], &p);
            for (pj, sj) in p.iter_mut().zip(&s_hist[i]) {
                *pj += (alpha_buf[i] - beta) * sj;
            }
        }
        p.iter_mut().for_each(|v| *v = -*v);
        let mut dphi0 = dot(&g, &p);
        if !(dphi0 < 0.0) {
            // not a descent direction: fall back to steepest descent
            s_hist.clear();
            y_hist.clear();
            rho.clear();
            for (pj, gj) in p.iter_mut().zip(&g) {
                *pj = -gj;
            }
            dphi0 = dot(&g, &p);
        }
        let alpha0 = if s_hist.is_empty() { (1.0 / norm(&g)).min(1.0) } else { 1.0 };
        let mut ls = LineSearch {
            f: &mut f,
            x: &x,
            p: &p,
            phi0: fx,
            dphi0,
            c1: cfg.c1,
            c2: cfg.c2,
            evals: 0,
            max_evals: cfg.max_line_search,
            trial: vec![0.0; n],
        };
        let outcome = ls.search(alpha0);
        evaluations += ls.evals;
        let accepted = match outcome {
            Ok(t) => Some((t, true)),
            Err(Some(t)) if t.phi < fx => Some((t, false)),
            Err(_) => None,
        };
        let Some((t, wolfe)) = accepted else {
            if s_hist.is_empty() {
                line_search_failed = true;
                break;
            }
            // retry once from steepest descent
            s_hist.clear();
            y_hist.clear();
            rho.clear();
            continue;
        };
        let s: Vec<f64> = p.iter().map(|v| t.alpha * v).collect();
        let y: Vec<f64> = t.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        fx = t.phi;
        g = t.grad;
        history.push(fx);
        iterations += 1;
        let sy = dot(&s, &y);
        if wolfe && sy > 1e-12 * norm(&s) * norm(&y) {
            if s_hist.len() == cfg.history_size {
                s_hist.remove(0);
                y_hist.remove(0);
                rho.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
            rho.push(1.0 / sy);
        }
    }
    Ok(OptimResult { grad_norm: norm(&g), theta: x, value: fx, history, iterations, evaluations, line_search_failed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifted_square(t: &[f64]) -> (f64, Vec<f64>) {
        ((t[0] - 3.0).powi(2), vec![2.0 * (t[0] - 3.0)])
    }

    fn rosenbrock(t: &[f64]) -> (f64, Vec<f64>) {
        let (x, y) = (t[0], t[1]);
        let f = (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2);
        (f, vec![-2.0 * (1.0 - x) - 400.0 * x * (y - x * x), 200.0 * (y - x * x)])
    }

    #[test]
    fn adam_finds_shifted_minimum() {
        let r = adam_run(shifted_square, &[0.0], &AdamConfig::new(2000, 0.1)).unwrap();
        assert!((r.theta[0] - 3.0).abs() <= 1e-4, "{}", r.theta[0]);
    }

    #[test]
    fn adam_rosenbrock() {
        let r = adam_run(rosenbrock, &[-1.2, 1.0], &AdamConfig::new(50_000, 0.01)).unwrap();
        assert!((r.theta[0] - 1.0).abs() < 1e-2 && (r.theta[1] - 1.0).abs() < 1e-2, "{:?}", r.theta);
    }

    #[test]
    fn adam_zero_gradient_keeps_theta() {
        let r = adam_run(|_: &[f64]| (1.0, vec![0.0, 0.0]), &[0.3, -2.0], &AdamConfig::new(100, 0.1)).unwrap();
        assert_eq!(r.theta, vec![0.3, -2.0]);
    }

    #[test]
    fn non_finite_loss_aborts() {
        let r = adam_run(|_: &[f64]| (f64::NAN, vec![0.0]), &[0.0], &AdamConfig::new(10, 0.1));
        assert!(matches!(r, Err(PinnError::Divergence(_))));
        let r = lbfgs_run(|_: &[f64]| (f64::INFINITY, vec![1.0]), &[0.0], &LbfgsConfig::new(10));
        assert!(matches!(r, Err(PinnError::Divergence(_))));
    }

    #[test]
    fn lbfgs_quadratic_terminates_quickly() {
        // diag(1..10) plus a coupling, minimum at b / A
        let n = 10;
        let a = |i: usize, j: usize| -> f64 {
            if i == j {
                (i + 1) as f64
            } else if i.abs_diff(j) == 1 {
                0.3
            } else {
                0.0
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let f = |t: &[f64]| {
            let mut g = vec![0.0; n];
            let mut v = 0.0;
            for i in 0..n {
                for j in 0..n {
                    g[i] += a(i, j) * t[j];
                }
                v += 0.5 * t[i] * g[i] - b[i] * t[i];
                g[i] -= b[i];
            }
            (v, g)
        };
        let r = lbfgs_run(f, &vec![0.0; n], &LbfgsConfig::new(30)).unwrap();
        assert!(r.grad_norm <= 1e-10, "{} after {}", r.grad_norm, r.iterations);
    }

    #[test]
    fn lbfgs_shifted_square() {
        let r = lbfgs_run(shifted_square, &[0.0], &LbfgsConfig::new(50)).unwrap();
        assert!((r.theta[0] - 3.0).abs() <= 1e-8);
    }

    #[test]
    fn lbfgs_rosenbrock() {
        let mut cfg = LbfgsConfig::new(200);
        cfg.tolerance = 1e-12;
        let r = lbfgs_run(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert!(
            (r.theta[0] - 1.0).abs() <= 1e-6 && (r.theta[1] - 1.0).abs() <= 1e-6,
            "{:?} in {}",
            r.theta,
            r.iterations
        );
        // the accepted iterates never increase the objective beyond rounding
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs()));
    }

    #[test]
    fn lbfgs_stops_on_flat_function() {
        let r = lbfgs_run(|_: &[f64]| (2.0, vec![0.0; 3]), &[1.0, 2.0, 3.0], &LbfgsConfig::new(10)).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.theta, vec![1.0, 2.0, 3.0]);
    }
}
