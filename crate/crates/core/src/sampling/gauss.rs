use std::f64::consts::PI;

use super::rule::{QuadratureKind, QuadratureRule};
use crate::error::{PinnError, Result};

/// Highest box dimension accepted by the tensor-product rule.
pub const MAX_GAUSS_DIM: usize = 4;

/// `n`-point Gauss-Legendre nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product composite Gauss-Legendre rule on the box
/// `[lower, upper]` with `cells_per_axis` equal cells per axis and
/// `nodes_per_cell` nodes per cell and axis.
pub fn gauss_legendre_composite(
    cells_per_axis: usize,
    nodes_per_cell: usize,
    lower: &[f64],
    upper: &[f64],
) -> Result<QuadratureRule> {
    let dim = lower.len();
    if dim == 0 || dim != upper.len() {
        return Err(PinnError::InvalidArgument("box bounds must be non-empty and of equal length".into()));
    }
    if dim > MAX_GAUSS_DIM {
        return Err(PinnError::UnsupportedDimension { dim, max: MAX_GAUSS_DIM });
    }
    if cells_per_axis == 0 || nodes_per_cell == 0 {
        return Err(PinnError::EmptyRule("Gauss-Legendre rule with zero cells or nodes".into()));
    }
    let (xi, wi) = gauss_legendre(nodes_per_cell);
    // 1D composite nodes and weights per axis
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
        .map(|a| {
            let h = (upper[a] - lower[a]) / cells_per_axis as f64;
            let mut n = Vec::with_capacity(cells_per_axis * nodes_per_cell);
            let mut w = Vec::with_capacity(cells_per_axis * nodes_per_cell);
            for c in 0..cells_per_axis {
                let mid = lower[a] + (c as f64 + 0.5) * h;
                for (x, wt) in xi.iter().zip(&wi) {
                    n.push(mid + 0.5 * h * x);
                    w.push(0.5 * h * wt);
                }
            }
            (n, w)
        })
        .collect();
    let per_axis = cells_per_axis * nodes_per_cell;
    let total = per_axis.pow(dim as u32);
    let mut points = Vec::with_capacity(total * dim);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let mut w = 1.0;
        for a in 0..dim {
            points.push(axes[a].0[idx[a]]);
            w *= axes[a].1[idx[a]];
        }
        weights.push(w);
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(QuadratureRule {
        dim,
        points,
        weights,
        kind: QuadratureKind::GaussLegendre,
        rate_alpha: 2.0 * nodes_per_cell as f64 / dim as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre_composite(1, 2, &[-1.0], &[1.0]).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.points[0] + s).abs() < 1e-15 && (r.points[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_cubic_vanishes() {
        let r = gauss_legendre_composite(1, 2, &[-1.0], &[1.0]).unwrap();
        assert!(r.integrate(|x| x[0].powi(3)).abs() < 1e-14);
    }

    #[test]
    fn quartic_with_four_nodes() {
        let r = gauss_legendre_composite(1, 4, &[0.0], &[1.0]).unwrap();
        assert!((r.integrate(|x| x[0].powi(4)) - 0.2).abs() < 1e-13);
    }

    #[test]
    fn exact_up_to_degree_2n_minus_1() {
        for n in 1..=12 {
            let r = gauss_legendre_composite(1, n, &[0.0], &[1.0]).unwrap();
            for k in 0..2 * n {
                let exact = 1.0 / (k as f64 + 1.0);
                let got = r.integrate(|x| x[0].powi(k as i32));
                assert!((got - exact).abs() <= 1e-12 * exact, "n={n} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn tensor_weights_sum_to_volume() {
        let r = gauss_legendre_composite(3, 2, &[0.0, -1.0, 2.0], &[0.5, 1.0, 5.0]).unwrap();
        assert_eq!(r.len(), 6usize.pow(3));
        assert!((r.total_weight() - 3.0).abs() < 1e-12 * 3.0);
        // separable polynomial t * x^2 * z^3
        let exact = (0.125) * (2.0 / 3.0) * ((625.0 - 16.0) / 4.0);
        let got = r.integrate(|p| p[0] * p[1] * p[1] * p[2].powi(3));
        assert!((got - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn rejects_high_dimension_and_empty() {
        assert!(gauss_legendre_composite(1, 2, &[0.0; 5], &[1.0; 5]).is_err());
        assert!(matches!(gauss_legendre_composite(0, 2, &[0.0], &[1.0]), Err(PinnError::EmptyRule(_))));
    }
}
