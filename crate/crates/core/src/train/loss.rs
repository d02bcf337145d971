use serde::{Deserialize, Serialize};

use crate::error::{PinnError, Result};
use crate::nn::{JetBatch, JetChannels, JetObjective, JetRead, JetSource, JetWrite, NetworkParams};
use crate::problems::{residuals, weighted_sq_sum, ProblemSpec, ResidualBundle};
use crate::sampling::TrainingSet;

/// Loss weights. Residuals always enter squared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    /// Weight of the interior (and divergence) terms.
    #[serde(default = "one")]
    pub lambda_residual: f64,
    /// Exponent `q` of the weight regularization, 1 or 2.
    #[serde(default = "two")]
    pub reg_exponent: u32,
    #[serde(default)]
    pub lambda_reg: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> u32 {
    2
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { lambda_residual: 1.0, reg_exponent: 2, lambda_reg: 0.0 }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_residual >= 0.0) || !(self.lambda_reg >= 0.0) {
            return Err(PinnError::InvalidArgument("loss weights must be non-negative".into()));
        }
        if self.reg_exponent != 1 && self.reg_exponent != 2 {
            return Err(PinnError::InvalidArgument(format!("reg_exponent must be 1 or 2, got {}", self.reg_exponent)));
        }
        Ok(())
    }
}

/// Weighted squared-residual sums and the total loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub tb_term: f64,
    pub sb_term: f64,
    /// Spatial-boundary term split by face id (`2 * axis + side`).
    pub sb_face_terms: Vec<f64>,
    pub int_term: f64,
    pub div_term: f64,
    pub reg_term: f64,
    pub lambda_residual: f64,
    pub lambda_reg: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn from_bundle(bundle: &ResidualBundle, sets: &TrainingSet, cfg: &LossConfig, reg_term: f64) -> Self {
        let tb_term = weighted_sq_sum(&bundle.temporal_boundary, bundle.tb_width, &sets.temporal_boundary.weights);
        let sb_w = &sets.spatial_boundary.rule.weights;
        let sb_term = weighted_sq_sum(&bundle.spatial_boundary, bundle.sb_width, sb_w);
        let mut sb_face_terms = vec![0.0; sets.geometry.n_faces()];
        for (i, r) in bundle.spatial_boundary.chunks_exact(bundle.sb_width).enumerate() {
            sb_face_terms[bundle.sb_faces[i]] += sb_w[i] * r.iter().map(|v| v * v).sum::<f64>();
        }
        let int_term = weighted_sq_sum(&bundle.interior, bundle.interior_width, &sets.interior.weights);
        let div_term = bundle.divergence.as_ref().map_or(0.0, |d| weighted_sq_sum(d, 1, &sets.interior.weights));
        let total = tb_term + sb_term + cfg.lambda_residual * (int_term + div_term) + cfg.lambda_reg * reg_term;
        Self {
            tb_term,
            sb_term,
            sb_face_terms,
            int_term,
            div_term,
            reg_term,
            lambda_residual: cfg.lambda_residual,
            lambda_reg: cfg.lambda_reg,
            total,
        }
    }
}

/// `sum |W|^q` over weight-matrix entries (biases excluded).
pub fn regularization(params: &NetworkParams, q: u32) -> f64 {
    params
        .flat()
        .iter()
        .zip(params.weight_mask())
        .filter(|(_, m)| *m)
        .map(|(t, _)| if q == 1 { t.abs() } else { t * t })
        .sum()
}

/// Loss breakdown of a network on a training set.
pub fn assemble_loss(
    params: &NetworkParams,
    problem: &ProblemSpec,
    sets: &TrainingSet,
    cfg: &LossConfig,
) -> LossBreakdown {
    let bundle = residuals(params, problem, sets);
    LossBreakdown::from_bundle(&bundle, sets, cfg, regularization(params, cfg.reg_exponent))
}

/// Loss breakdown of any jet source (no regularization term).
pub fn assemble_loss_for(
    source: &dyn JetSource,
    problem: &ProblemSpec,
    sets: &TrainingSet,
    cfg: &LossConfig,
) -> LossBreakdown {
    LossBreakdown::from_bundle(&residuals(source, problem, sets), sets, cfg, 0.0)
}

const BLOCK_INT: usize = 0;
const BLOCK_SB: usize = 1;
const BLOCK_TB: usize = 2;

/// The training loss as a differentiable objective over network jets.
pub struct PinnLoss<'a> {
    spec: &'a ProblemSpec,
    cfg: LossConfig,
    weight_mask: Vec<bool>,
    int_points: &'a [f64],
    int_weights: &'a [f64],
    int_channels: JetChannels,
    forcing: Vec<f64>,
    /// Boundary points; for periodic problems pairs are interleaved
    /// `(primary, partner)`.
    sb_points: Vec<f64>,
    sb_weights: &'a [f64],
    sb_faces: &'a [usize],
    sb_targets: Vec<f64>,
    paired: bool,
    tb_points: &'a [f64],
    tb_weights: &'a [f64],
    tb_targets: Vec<f64>,
    value_channels: JetChannels,
}

impl<'a> PinnLoss<'a> {
    pub fn new(spec: &'a ProblemSpec, sets: &'a TrainingSet, cfg: LossConfig, weight_mask: Vec<bool>) -> Self {
        let d = spec.input_dim();
        let sb = &sets.spatial_boundary;
        let (sb_points, paired) = match &sb.partners {
            Some(partners) => {
                let mut pts = Vec::with_capacity(2 * sb.rule.points.len());
                for (p, q) in sb.rule.points.chunks_exact(d).zip(partners.chunks_exact(d)) {
                    pts.extend_from_slice(p);
                    pts.extend_from_slice(q);
                }
                (pts, true)
            }
            None => (sb.rule.points.clone(), false),
        };
        Self {
            spec,
            cfg,
            weight_mask,
            int_points: &sets.interior.points,
            int_weights: &sets.interior.weights,
            int_channels: spec.interior_channels(),
            forcing: spec.interior_forcing(&sets.interior.points),
            sb_points,
            sb_weights: &sb.rule.weights,
            sb_faces: &sb.faces,
            sb_targets: spec.sb_targets(sb),
            paired,
            tb_points: &sets.temporal_boundary.points,
            tb_weights: &sets.temporal_boundary.weights,
            tb_targets: spec.tb_targets(&sets.temporal_boundary),
            value_channels: JetChannels::value_only(d),
        }
    }

    fn interior_loss(&self, first: usize, jets: &JetBatch, mut cot: Option<&mut JetBatch>) -> f64 {
        let k = self.spec.interior_components();
        let fw = self.spec.forcing_width();
        let lambda = self.cfg.lambda_residual;
        let mut r = [0.0; 3];
        let mut rbar = [0.0; 3];
        let mut total = 0.0;
        for p in 0..jets.n_points() {
            let g = first + p;
            let w = self.int_weights[g];
            let f = if fw == 0 { &[][..] } else { &self.forcing[g * fw..(g + 1) * fw] };
            let j = jets.point(p);
            self.spec.interior_residual(&j, f, &mut r[..k]);
            total += w * r[..k].iter().map(|v| v * v).sum::<f64>();
            if let Some(c) = cot.as_deref_mut() {
                for i in 0..k {
                    rbar[i] = 2.0 * lambda * w * r[i];
                }
                self.spec.interior_residual_adjoint(&j, &rbar[..k], &mut c.point_mut(p));
            }
        }
        lambda * total
    }

    fn boundary_loss(&self, first: usize, jets: &JetBatch, mut cot: Option<&mut JetBatch>) -> f64 {
        let m = self.spec.output_dim;
        let k = self.spec.sb_components();
        let stride = if self.paired { 2 } else { 1 };
        let mut r = vec![0.0; k];
        let mut rbar = vec![0.0; k];
        let mut cp = vec![0.0; m];
        let mut cq = vec![0.0; m];
        let mut total = 0.0;
        for p in 0..jets.n_points() / stride {
            let g = first / stride + p;
            let w = self.sb_weights[g];
            let face = self.sb_faces[g];
            let j = jets.point(p * stride);
            let partner = self.paired.then(|| jets.point(p * stride + 1));
            let target = if self.sb_targets.is_empty() { &[][..] } else { &self.sb_targets[g * m..(g + 1) * m] };
            self.spec.sb_residual(face, &j, partner.as_ref(), target, &mut r);
            total += w * r.iter().map(|v| v * v).sum::<f64>();
            if let Some(c) = cot.as_deref_mut() {
                for i in 0..k {
                    rbar[i] = 2.0 * w * r[i];
                }
                self.spec.sb_value_cotangent(face, &rbar, &mut cp, &mut cq);
                let mut wp = c.point_mut(p * stride);
                for (o, v) in cp.iter().enumerate() {
                    wp.add_value(o, *v);
                }
                if self.paired {
                    let mut wq = c.point_mut(p * stride + 1);
                    for (o, v) in cq.iter().enumerate() {
                        wq.add_value(o, *v);
                    }
                }
            }
        }
        total
    }

    fn temporal_loss(&self, first: usize, jets: &JetBatch, mut cot: Option<&mut JetBatch>) -> f64 {
        let k = self.spec.tb_outputs();
        let mut total = 0.0;
        for p in 0..jets.n_points() {
            let g = first + p;
            let w = self.tb_weights[g];
            for i in 0..k {
                let r = jets.point(p).value(i) - self.tb_targets[g * k + i];
                total += w * r * r;
                if let Some(c) = cot.as_deref_mut() {
                    c.point_mut(p).add_value(i, 2.0 * w * r);
                }
            }
        }
        total
    }
}

impl JetObjective for PinnLoss<'_> {
    fn n_blocks(&self) -> usize {
        3
    }

    fn block_points(&self, block: usize) -> &[f64] {
        match block {
            BLOCK_INT => self.int_points,
            BLOCK_SB => &self.sb_points,
            _ => self.tb_points,
        }
    }

    fn block_channels(&self, block: usize) -> &JetChannels {
        match block {
            BLOCK_INT => &self.int_channels,
            _ => &self.value_channels,
        }
    }

    fn block_granularity(&self, block: usize) -> usize {
        if block == BLOCK_SB && self.paired {
            2
        } else {
            1
        }
    }

    fn block_loss(&self, block: usize, first: usize, jets: &JetBatch, cotangent: Option<&mut JetBatch>) -> f64 {
        match block {
            BLOCK_INT => self.interior_loss(first, jets, cotangent),
            BLOCK_SB => self.boundary_loss(first, jets, cotangent),
            BLOCK_TB => self.temporal_loss(first, jets, cotangent),
            _ => unreachable!(),
        }
    }

    fn param_loss(&self, theta: &[f64], grad: Option<&mut [f64]>) -> f64 {
        if self.cfg.lambda_reg == 0.0 {
            return 0.0;
        }
        let lr = self.cfg.lambda_reg;
        let q = self.cfg.reg_exponent;
        let mut total = 0.0;
        let mut g = grad;
        for (i, (&t, &m)) in theta.iter().zip(&self.weight_mask).enumerate() {
            if !m {
                continue;
            }
            if q == 1 {
                total += t.abs();
                if let Some(g) = g.as_deref_mut() {
                    g[i] += lr
                        * if t > 0.0 {
                            1.0
                        } else if t < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                }
            } else {
                total += t * t;
                if let Some(g) = g.as_deref_mut() {
                    g[i] += 2.0 * lr * t;
                }
            }
        }
        lr * total
    }
}
