use std::f64::consts::PI;
use std::fmt::Debug;

use crate::field::Field;
use crate::nn::{Jet, JetBatch, JetChannels, JetSource};

/// Closed-form solution with analytic input derivatives.
pub trait ExactSolution: Send + Sync + Debug {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    /// Value, gradient and pure second derivatives at `y = (t, x)`.
    fn jet(&self, y: &[f64]) -> Jet;
    fn value(&self, y: &[f64]) -> Vec<f64> {
        self.jet(y).value
    }
}

/// Adapter exposing an exact solution as a jet source and a field.
#[derive(Clone, Copy)]
pub struct Analytic<'a>(pub &'a dyn ExactSolution);

impl JetSource for Analytic<'_> {
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.0.output_dim()
    }

    fn jet_batch(&self, points: &[f64], channels: &JetChannels) -> JetBatch {
        let d = self.0.input_dim();
        let m = self.0.output_dim();
        let n = points.len() / d;
        let mut out = JetBatch::zeros(channels.clone(), n, m);
        for (p, y) in points.chunks_exact(d).enumerate() {
            let j = self.0.jet(y);
            for i in 0..m {
                out.set(p, i, 0, j.value[i]);
                for &a in channels.tangents() {
                    out.set(p, i, channels.tangent_channel(a).unwrap(), j.grad[i * d + a]);
                }
                for &a in channels.seconds() {
                    out.set(p, i, channels.second_channel(a).unwrap(), j.hess_diag[i * d + a]);
                }
            }
        }
        out
    }
}

impl Field for Analytic<'_> {
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.0.output_dim()
    }

    fn eval(&self, points: &[f64]) -> Vec<f64> {
        points.chunks_exact(self.0.input_dim()).flat_map(|y| self.0.value(y)).collect()
    }
}

/// `u(t, x) = -sin(pi x) exp(-pi^2 t)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Heat1dExact;

pub fn exact_heat_1d(x: f64, t: f64) -> f64 {
    -(PI * x).sin() * (-PI * PI * t).exp()
}

impl ExactSolution for Heat1dExact {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn jet(&self, y: &[f64]) -> Jet {
        let (t, x) = (y[0], y[1]);
        let e = (-PI * PI * t).exp();
        let s = (PI * x).sin();
        let c = (PI * x).cos();
        let mut j = Jet::zeros(1, 2);
        j.value[0] = -s * e;
        j.grad[0] = PI * PI * s * e;
        j.grad[1] = -PI * c * e;
        j.hess_diag[0] = -PI.powi(4) * s * e;
        j.hess_diag[1] = PI * PI * s * e;
        j
    }

    fn value(&self, y: &[f64]) -> Vec<f64> {
        vec![exact_heat_1d(y[1], y[0])]
    }
}

/// `u(t, x) = |x|^2 / n + 2t`; solves the heat equation when `n` equals
/// the spatial dimension.
#[derive(Debug, Clone, Copy)]
pub struct HeatNdExact {
    pub spatial_dim: usize,
    pub n: f64,
}

pub fn exact_heat_nd(x: &[f64], t: f64, n: usize) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / n as f64 + 2.0 * t
}

impl ExactSolution for HeatNdExact {
    fn input_dim(&self) -> usize {
        self.spatial_dim + 1
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn jet(&self, y: &[f64]) -> Jet {
        let d = self.spatial_dim + 1;
        let mut j = Jet::zeros(1, d);
        j.value[0] = y[1..].iter().map(|v| v * v).sum::<f64>() / self.n + 2.0 * y[0];
        j.grad[0] = 2.0;
        for a in 1..d {
            j.grad[a] = 2.0 * y[a] / self.n;
            j.hess_diag[a] = 2.0 / self.n;
        }
        j
    }
}

/// Translating Gaussian vortex with velocity `(u, v)` and pressure `p`.
#[derive(Debug, Clone, Copy)]
pub struct TaylorVortexExact {
    pub a_x: f64,
    pub a_y: f64,
}

/// Velocity of the translating vortex at `(x, y, t)`.
pub fn exact_taylor_vortex(x: f64, y: f64, t: f64, a_x: f64, a_y: f64) -> (f64, f64) {
    let v = TaylorVortexExact { a_x, a_y }.value(&[t, x, y]);
    (v[0], v[1])
}

impl TaylorVortexExact {
    /// Vorticity `v_x - u_y` at `(t, x, y)`.
    pub fn vorticity(&self, y: &[f64]) -> f64 {
        let xi = y[1] - self.a_x * y[0];
        let eta = y[2] - self.a_y * y[0];
        let e = (0.5 * (1.0 - xi * xi - eta * eta)).exp();
        (2.0 - xi * xi - eta * eta) * e
    }
}

impl ExactSolution for TaylorVortexExact {
    fn input_dim(&self) -> usize {
        3
    }

    fn output_dim(&self) -> usize {
        3
    }

    fn jet(&self, y: &[f64]) -> Jet {
        let (ax, ay) = (self.a_x, self.a_y);
        let xi = y[1] - ax * y[0];
        let eta = y[2] - ay * y[0];
        let e = (0.5 * (1.0 - xi * xi - eta * eta)).exp();
        let e2 = e * e;
        // derivatives in the co-moving frame (xi, eta)
        let u = [-eta * e + ax, xi * eta * e, (eta * eta - 1.0) * e];
        let u2 = [eta * (1.0 - xi * xi) * e, xi * (1.0 - eta * eta) * e, eta * (3.0 - eta * eta) * e];
        let v = [xi * e + ay, (1.0 - xi * xi) * e, -xi * eta * e];
        let v2 = [-xi * (3.0 - xi * xi) * e, -eta * (1.0 - xi * xi) * e, -xi * (1.0 - eta * eta) * e];
        let p = [-0.5 * e2, xi * e2, eta * e2];
        let p2 = [(1.0 - 2.0 * xi * xi) * e2, -2.0 * xi * eta * e2, (1.0 - 2.0 * eta * eta) * e2];
        let mut j = Jet::zeros(3, 3);
        for (i, (f, f2)) in [(u, u2), (v, v2), (p, p2)].iter().enumerate() {
            // f = [value, f_xi, f_eta]; f2 = [f_xixi, f_xieta, f_etaeta]
            j.value[i] = f[0];
            j.grad[i * 3] = -ax * f[1] - ay * f[2];
            j.grad[i * 3 + 1] = f[1];
            j.grad[i * 3 + 2] = f[2];
            j.hess_diag[i * 3] = ax * ax * f2[0] + 2.0 * ax * ay * f2[1] + ay * ay * f2[2];
            j.hess_diag[i * 3 + 1] = f2[0];
            j.hess_diag[i * 3 + 2] = f2[2];
        }
        j
    }
}

/// Inviscid Burgers rarefaction from the step `0 | 1` at the origin:
/// `u = clamp(x / t, 0, 1)` for `t > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RarefactionExact;

impl ExactSolution for RarefactionExact {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn jet(&self, y: &[f64]) -> Jet {
        let (t, x) = (y[0], y[1]);
        let mut j = Jet::zeros(1, 2);
        if t <= 0.0 {
            j.value[0] = rarefaction_initial_data(x);
        } else if x <= 0.0 {
            j.value[0] = 0.0;
        } else if x >= t {
            j.value[0] = 1.0;
        } else {
            j.value[0] = x / t;
            j.grad[0] = -x / (t * t);
            j.grad[1] = 1.0 / t;
            j.hess_diag[0] = 2.0 * x / (t * t * t);
        }
        j
    }
}

/// Step data `0` for `x <= 0`, `1` for `x > 0`.
pub fn rarefaction_initial_data(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::JetRead;

    fn check_jet(sol: &dyn ExactSolution, y: &[f64]) {
        let j = sol.jet(y);
        let d = y.len();
        let h = 1e-5;
        for a in 0..d {
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[a] += h;
            ym[a] -= h;
            let (fp, fm, f0) = (sol.value(&yp), sol.value(&ym), sol.value(y));
            for i in 0..sol.output_dim() {
                let g = (fp[i] - fm[i]) / (2.0 * h);
                let s = (fp[i] - 2.0 * f0[i] + fm[i]) / (h * h);
                assert!((g - j.d(i, a)).abs() < 1e-7 * (1.0 + g.abs()), "grad {i},{a}: {g} vs {}", j.d(i, a));
                assert!((s - j.dd(i, a)).abs() < 1e-3 * (1.0 + s.abs()), "hess {i},{a}: {s} vs {}", j.dd(i, a));
            }
            assert_eq!(f0, j.value);
        }
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(exact_heat_1d(0.5, 0.0), -1.0);
        assert_eq!(exact_heat_nd(&[0.0; 4], 0.25, 4), 0.5);
        let (u, v) = exact_taylor_vortex(0.3, -0.7, 0.0, 4.0, 0.0);
        let e = (0.5 * (1.0 - 0.09 - 0.49f64)).exp();
        assert!((u - (0.7 * e + 4.0)).abs() < 1e-15);
        assert!((v - 0.3 * e).abs() < 1e-15);
        assert_eq!(rarefaction_initial_data(-0.5), 0.0);
        assert_eq!(rarefaction_initial_data(0.5), 1.0);
    }

    #[test]
    fn analytic_jets_match_finite_differences() {
        check_jet(&Heat1dExact, &[0.3, 0.41]);
        check_jet(&HeatNdExact { spatial_dim: 3, n: 3.0 }, &[0.2, 0.1, 0.5, 0.9]);
        check_jet(&TaylorVortexExact { a_x: 4.0, a_y: 0.5 }, &[0.3, 1.1, -0.4]);
        check_jet(&RarefactionExact, &[0.4, 0.1]);
    }

    #[test]
    fn taylor_vortex_vorticity_matches_jet() {
        let tv = TaylorVortexExact { a_x: 4.0, a_y: 0.0 };
        let y = [0.2, 1.3, 0.4];
        let j = tv.jet(&y);
        assert!((tv.vorticity(&y) - (j.d(1, 1) - j.d(0, 2))).abs() < 1e-14);
    }
}
