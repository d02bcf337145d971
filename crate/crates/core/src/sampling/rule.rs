use serde::{Deserialize, Serialize};

/// How a point set was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    Sobol,
    MonteCarlo,
    GaussLegendre,
}

impl std::fmt::Display for QuadratureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Sobol => "sobol",
            Self::MonteCarlo => "monte_carlo",
            Self::GaussLegendre => "gauss_legendre",
        })
    }
}

/// Weighted point set. `points` is row-major `len() x dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
    /// Nominal convergence exponent of the rule (metadata only).
    pub rate_alpha: f64,
}

impl QuadratureRule {
    /// Equal-weight rule over a set of measure `measure`.
    pub fn equal_weight(dim: usize, points: Vec<f64>, measure: f64, kind: QuadratureKind, rate_alpha: f64) -> Self {
        let n = points.len() / dim.max(1);
        let w = if n == 0 { 0.0 } else { measure / n as f64 };
        Self { dim, points, weights: vec![w; n], kind, rate_alpha }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points_vec(&self) -> Vec<Vec<f64>> {
        self.points.chunks_exact(self.dim).map(|c| c.to_vec()).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_i w_i g(y_i)`.
    pub fn integrate(&self, g: impl Fn(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * g(self.point(i))).sum()
    }

    /// Appends another rule of the same dimension and kind.
    pub(crate) fn extend(&mut self, other: QuadratureRule) {
        debug_assert_eq!(self.dim, other.dim);
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }
}
