use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PinnError, Result};
use crate::field::{Field, FirstOutputs};
use crate::problems::{Pde, ProblemSpec};
use crate::sampling::{random_box_points, SpaceTimeBox};
use crate::train::LossBreakdown;

/// Training error split into its components.
///
/// Components are square roots of the unscaled weighted sums. How they
/// combine into `e_total` depends on the family: heat and conservation laws
/// scale the interior part by `lambda`, Euler scales only the divergence
/// part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingErrorReport {
    pub family: String,
    pub e_tb: f64,
    /// Whole spatial boundary.
    pub e_sb: f64,
    /// Left and right boundary streams of a 1D conservation law.
    pub e_sb0: Option<f64>,
    pub e_sb1: Option<f64>,
    pub e_int: f64,
    pub e_div: Option<f64>,
    pub lambda: f64,
    pub e_total: f64,
}

/// Training-error report of a loss breakdown for the given PDE family.
pub fn training_error(breakdown: &LossBreakdown, pde: &Pde) -> TrainingErrorReport {
    let b = breakdown;
    let lambda = b.lambda_residual;
    let (e_sb0, e_sb1, e_div, total_sq) = match pde {
        Pde::Heat { .. } => (None, None, None, b.tb_term + b.sb_term + lambda * b.int_term),
        Pde::ConservationLaw { .. } => {
            let f0 = b.sb_face_terms.first().copied().unwrap_or(0.0);
            let f1 = b.sb_face_terms.get(1).copied().unwrap_or(0.0);
            (Some(f0.sqrt()), Some(f1.sqrt()), None, lambda * b.int_term + b.tb_term + f0 + f1)
        }
        Pde::Euler { .. } => {
            (None, None, Some(b.div_term.sqrt()), b.tb_term + b.sb_term + b.int_term + lambda * b.div_term)
        }
    };
    TrainingErrorReport {
        family: pde.family().into(),
        e_tb: b.tb_term.sqrt(),
        e_sb: b.sb_term.sqrt(),
        e_sb0,
        e_sb1,
        e_int: b.int_term.sqrt(),
        e_div,
        lambda,
        e_total: total_sq.sqrt(),
    }
}

/// Monte-Carlo estimate of the space-time L2 distance between two fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationReport {
    pub e_g: f64,
    /// `100 * e_g / ||truth||`, in percent.
    pub e_g_rel: f64,
    pub truth_norm: f64,
    pub n_test: usize,
    pub seed: u64,
}

const TEST_CHUNK: usize = 4096;

/// L2 error of `candidate` against `truth` on `n_test` uniform random points
/// of the box. Both fields must have the same number of outputs.
pub fn generalization_error(
    candidate: &dyn Field,
    truth: &dyn Field,
    geometry: &SpaceTimeBox,
    n_test: usize,
    seed: u64,
) -> Result<GeneralizationReport> {
    let d = geometry.input_dim();
    if candidate.input_dim() != d || truth.input_dim() != d {
        return Err(PinnError::Shape { expected: d, got: candidate.input_dim().min(truth.input_dim()) });
    }
    if candidate.output_dim() != truth.output_dim() {
        return Err(PinnError::Shape { expected: truth.output_dim(), got: candidate.output_dim() });
    }
    if n_test == 0 {
        return Err(PinnError::InvalidArgument("n_test must be positive".into()));
    }
    let points = random_box_points(geometry, n_test, seed);
    let (err_sq, norm_sq) = points
        .par_chunks(TEST_CHUNK * d)
        .map(|pts| {
            let a = candidate.eval(pts);
            let b = truth.eval(pts);
            a.iter().zip(&b).fold((0.0, 0.0), |(e, n), (x, y)| (e + (x - y) * (x - y), n + y * y))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |(e, n), (a, b)| (e + a, n + b));
    let scale = geometry.volume() / n_test as f64;
    let e_g = (err_sq * scale).sqrt();
    let truth_norm = (norm_sq * scale).sqrt();
    let e_g_rel = if truth_norm > 0.0 {
        100.0 * e_g / truth_norm
    } else if e_g == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(GeneralizationReport { e_g, e_g_rel, truth_norm, n_test, seed })
}

/// Generalization error over the outputs that carry the solution (velocity
/// only for Euler).
pub fn problem_generalization_error(
    problem: &ProblemSpec,
    candidate: &dyn Field,
    truth: &dyn Field,
    n_test: usize,
    seed: u64,
) -> Result<GeneralizationReport> {
    let k = problem.error_outputs();
    let c = FirstOutputs { inner: candidate, k };
    let t = FirstOutputs { inner: truth, k };
    generalization_error(&c, &t, &problem.geometry, n_test, seed)
}
