use serde::{Deserialize, Serialize};

use super::random::uniform_random_flat;
use super::rule::QuadratureKind;
use super::sobol::sobol_flat;
use crate::error::{PinnError, Result};

/// Quadrature errors at increasing point counts and the fitted exponent
/// `alpha` of `error ~ C N^-alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub ns: Vec<usize>,
    pub errors: Vec<f64>,
    pub alpha: f64,
}

/// Least-squares slope of `-ln error` against `ln n`.
pub fn fit_rate(ns: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| -e.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Empirical convergence rate of equal-weight rules on `[0, 1]^dim`.
///
/// Monte-Carlo errors are root-mean-square over `reps` independent draws;
/// Sobol errors are those of the deterministic sequence prefix.
pub fn empirical_rate(
    kind: QuadratureKind,
    dim: usize,
    integrand: impl Fn(&[f64]) -> f64,
    exact: f64,
    ns: &[usize],
    reps: usize,
    seed: u64,
) -> Result<RateFit> {
    if ns.len() < 2 {
        return Err(PinnError::InvalidArgument("need at least two point counts".into()));
    }
    let mean = |pts: &[f64]| pts.chunks_exact(dim).map(&integrand).sum::<f64>() / (pts.len() / dim) as f64;
    let mut errors = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let err = match kind {
            QuadratureKind::MonteCarlo => {
                let reps = reps.max(1);
                let ms: f64 = (0..reps)
                    .map(|r| {
                        let s = seed.wrapping_add((i * reps + r) as u64 * 0x9E37_79B9);
                        (mean(&uniform_random_flat(n, dim, s)) - exact).powi(2)
                    })
                    .sum();
                (ms / reps as f64).sqrt()
            }
            QuadratureKind::Sobol => (mean(&sobol_flat(n, dim)?) - exact).abs(),
            QuadratureKind::GaussLegendre => {
                return Err(PinnError::InvalidArgument("Gauss rules are checked for exactness, not rates".into()))
            }
        };
        errors.push(err);
    }
    Ok(RateFit { ns: ns.to_vec(), alpha: fit_rate(ns, &errors), errors })
}
