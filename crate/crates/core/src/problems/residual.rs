use rayon::prelude::*;

use super::spec::{BoundaryCondition, Pde, ProblemSpec};
use crate::error::{PinnError, Result};
use crate::nn::{JetChannels, JetRead, JetSource, JetWrite};
use crate::sampling::{BoundarySet, QuadratureRule, TrainingSet};

/// Euler outputs.
const U: usize = 0;
const V: usize = 1;
const P: usize = 2;
/// Input coordinates.
const T: usize = 0;
const X: usize = 1;
const Y: usize = 2;

impl ProblemSpec {
    /// Residual components per interior point: one for scalar problems;
    /// two momentum components followed by the divergence for Euler.
    pub fn interior_components(&self) -> usize {
        match self.pde {
            Pde::Euler { .. } => 3,
            _ => 1,
        }
    }

    /// Jet channels needed by the interior residual.
    pub fn interior_channels(&self) -> JetChannels {
        let dbar = self.input_dim();
        let all: Vec<usize> = (0..dbar).collect();
        match self.pde {
            Pde::Heat { .. } => JetChannels::new(dbar, &all, &all[1..]).expect("valid channels"),
            Pde::ConservationLaw { .. } => JetChannels::new(dbar, &[T, X], &[X]).expect("valid channels"),
            Pde::Euler { .. } => JetChannels::first_order(dbar),
        }
    }

    /// Per-point width of the precomputed forcing.
    pub fn forcing_width(&self) -> usize {
        match &self.pde {
            Pde::Euler { forcing: Some(_) } => self.spatial_dim(),
            _ => 0,
        }
    }

    /// Forcing values at interior points, row-major `n x forcing_width()`.
    pub fn interior_forcing(&self, points: &[f64]) -> Vec<f64> {
        match &self.pde {
            Pde::Euler { forcing: Some(f) } => points.chunks_exact(self.input_dim()).flat_map(|y| f(y)).collect(),
            _ => Vec::new(),
        }
    }

    /// Interior residual at one point; `forcing` is this point's slice of
    /// `interior_forcing` (empty when there is none).
    pub fn interior_residual<J: JetRead>(&self, j: &J, forcing: &[f64], out: &mut [f64]) {
        match &self.pde {
            Pde::Heat { source } => {
                let u = j.value(0);
                let lap: f64 = (1..self.input_dim()).map(|a| j.dd(0, a)).sum();
                out[0] = j.d(0, T) - lap - (source.f)(u);
            }
            Pde::ConservationLaw { nu, flux } => {
                let u = j.value(0);
                out[0] = j.d(0, T) + (flux.f_prime)(u) * j.d(0, X) - nu * j.dd(0, X);
            }
            Pde::Euler { .. } => {
                let (u, v) = (j.value(U), j.value(V));
                let (f1, f2) = if forcing.is_empty() { (0.0, 0.0) } else { (forcing[0], forcing[1]) };
                out[0] = j.d(U, T) + u * j.d(U, X) + v * j.d(U, Y) + j.d(P, X) - f1;
                out[1] = j.d(V, T) + u * j.d(V, X) + v * j.d(V, Y) + j.d(P, Y) - f2;
                out[2] = j.d(U, X) + j.d(V, Y);
            }
        }
    }

    /// Adds `rbar · d(interior_residual) / d(jet)` into `w`.
    pub fn interior_residual_adjoint<J: JetRead, W: JetWrite>(&self, j: &J, rbar: &[f64], w: &mut W) {
        match &self.pde {
            Pde::Heat { source } => {
                let r = rbar[0];
                w.add_d(0, T, r);
                for a in 1..self.input_dim() {
                    w.add_dd(0, a, -r);
                }
                w.add_value(0, -r * (source.f_prime)(j.value(0)));
            }
            Pde::ConservationLaw { nu, flux } => {
                let r = rbar[0];
                let u = j.value(0);
                w.add_d(0, T, r);
                w.add_d(0, X, r * (flux.f_prime)(u));
                w.add_value(0, r * (flux.f_second)(u) * j.d(0, X));
                w.add_dd(0, X, -nu * r);
            }
            Pde::Euler { .. } => {
                let (u, v) = (j.value(U), j.value(V));
                for (k, comp) in [U, V].into_iter().enumerate() {
                    let r = rbar[k];
                    if r == 0.0 {
                        continue;
                    }
                    w.add_d(comp, T, r);
                    w.add_value(U, r * j.d(comp, X));
                    w.add_d(comp, X, r * u);
                    w.add_value(V, r * j.d(comp, Y));
                    w.add_d(comp, Y, r * v);
                    w.add_d(P, if k == 0 { X } else { Y }, r);
                }
                w.add_d(U, X, rbar[2]);
                w.add_d(V, Y, rbar[2]);
            }
        }
    }

    /// Residual components per spatial-boundary point.
    pub fn sb_components(&self) -> usize {
        match self.boundary {
            BoundaryCondition::NoPenetration => 1,
            _ => self.output_dim,
        }
    }

    /// Dirichlet boundary values at the boundary points (`n x output_dim`),
    /// empty for other boundary conditions.
    pub fn sb_targets(&self, sb: &BoundarySet) -> Vec<f64> {
        match &self.boundary {
            BoundaryCondition::Dirichlet(g) => {
                sb.rule.points.chunks_exact(self.input_dim()).flat_map(|y| g(y)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Spatial-boundary residual at one point. `partner` is the jet at the
    /// paired point for periodic problems; `target` is the Dirichlet value.
    pub fn sb_residual<J: JetRead>(&self, face: usize, j: &J, partner: Option<&J>, target: &[f64], out: &mut [f64]) {
        match self.boundary {
            BoundaryCondition::Dirichlet(_) => {
                for k in 0..self.output_dim {
                    out[k] = j.value(k) - target[k];
                }
            }
            BoundaryCondition::Periodic => {
                let q = partner.expect("periodic residual needs partner jets");
                for k in 0..self.output_dim {
                    out[k] = j.value(k) - q.value(k);
                }
            }
            BoundaryCondition::NoPenetration => {
                out[0] = normal_sign(face) * j.value(face / 2);
            }
        }
    }

    /// Value cotangents of the boundary residual: writes
    /// `rbar · d r / d u` at the primary point into `primary` and at the
    /// partner point into `partner` (both `output_dim` long, overwritten).
    pub fn sb_value_cotangent(&self, face: usize, rbar: &[f64], primary: &mut [f64], partner: &mut [f64]) {
        primary.fill(0.0);
        partner.fill(0.0);
        match self.boundary {
            BoundaryCondition::Dirichlet(_) => primary.copy_from_slice(&rbar[..self.output_dim]),
            BoundaryCondition::Periodic => {
                for k in 0..self.output_dim {
                    primary[k] = rbar[k];
                    partner[k] = -rbar[k];
                }
            }
            BoundaryCondition::NoPenetration => primary[face / 2] = normal_sign(face) * rbar[0],
        }
    }

    /// Initial data at temporal-boundary points, `n x tb_outputs()`.
    pub fn tb_targets(&self, tb: &QuadratureRule) -> Vec<f64> {
        let k = self.tb_outputs();
        tb.points
            .chunks_exact(self.input_dim())
            .flat_map(|y| {
                let v = (self.initial_data)(&y[1..]);
                debug_assert_eq!(v.len(), k);
                v
            })
            .collect()
    }
}

/// Outward normal sign of a face.
fn normal_sign(face: usize) -> f64 {
    if face % 2 == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Per-point residuals of a candidate on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBundle {
    /// `n_int x interior_width` (momentum components for Euler).
    pub interior: Vec<f64>,
    pub interior_width: usize,
    /// Divergence residual per interior point (Euler only).
    pub divergence: Option<Vec<f64>>,
    /// `n_sb x sb_width`.
    pub spatial_boundary: Vec<f64>,
    pub sb_width: usize,
    /// Face id of every spatial-boundary residual.
    pub sb_faces: Vec<usize>,
    /// `n_tb x tb_width`.
    pub temporal_boundary: Vec<f64>,
    pub tb_width: usize,
}

impl ResidualBundle {
    pub fn max_abs(&self) -> f64 {
        self.interior
            .iter()
            .chain(self.divergence.iter().flatten())
            .chain(&self.spatial_boundary)
            .chain(&self.temporal_boundary)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `sum_n w_n |r_n|^2` for row-major residuals of width `width`.
pub fn weighted_sq_sum(values: &[f64], width: usize, weights: &[f64]) -> f64 {
    values.chunks_exact(width).zip(weights).map(|(r, w)| w * r.iter().map(|v| v * v).sum::<f64>()).sum()
}

const EVAL_CHUNK: usize = 1024;

/// Interior residual rows (all components) at `points`.
pub fn interior_residuals_at(source: &dyn JetSource, spec: &ProblemSpec, points: &[f64]) -> Vec<f64> {
    let d = spec.input_dim();
    let k = spec.interior_components();
    let fw = spec.forcing_width();
    let channels = spec.interior_channels();
    let forcing = spec.interior_forcing(points);
    let parts: Vec<Vec<f64>> = points
        .par_chunks(EVAL_CHUNK * d)
        .enumerate()
        .map(|(c, pts)| {
            let jets = source.jet_batch(pts, &channels);
            let mut out = vec![0.0; jets.n_points() * k];
            for p in 0..jets.n_points() {
                let g = c * EVAL_CHUNK + p;
                let f = if fw == 0 { &[][..] } else { &forcing[g * fw..(g + 1) * fw] };
                spec.interior_residual(&jets.point(p), f, &mut out[p * k..(p + 1) * k]);
            }
            out
        })
        .collect();
    parts.concat()
}

/// Spatial-boundary residual rows on a boundary set.
pub fn boundary_residuals_at(source: &dyn JetSource, spec: &ProblemSpec, sb: &BoundarySet) -> Vec<f64> {
    let d = spec.input_dim();
    let k = spec.sb_components();
    let m = spec.output_dim;
    let channels = JetChannels::value_only(d);
    let jets = source.jet_batch(&sb.rule.points, &channels);
    let partner_jets = sb.partners.as_ref().map(|p| source.jet_batch(p, &channels));
    let targets = spec.sb_targets(sb);
    let mut out = vec![0.0; sb.rule.len() * k];
    for p in 0..sb.rule.len() {
        let partner = partner_jets.as_ref().map(|b| b.point(p));
        let target = if targets.is_empty() { &[][..] } else { &targets[p * m..(p + 1) * m] };
        spec.sb_residual(sb.faces[p], &jets.point(p), partner.as_ref(), target, &mut out[p * k..(p + 1) * k]);
    }
    out
}

/// Temporal-boundary residual rows on a rule at `t = 0`.
pub fn temporal_residuals_at(source: &dyn JetSource, spec: &ProblemSpec, tb: &QuadratureRule) -> Vec<f64> {
    let k = spec.tb_outputs();
    let jets = source.jet_batch(&tb.points, &JetChannels::value_only(spec.input_dim()));
    let targets = spec.tb_targets(tb);
    let mut out = vec![0.0; tb.len() * k];
    for p in 0..tb.len() {
        for i in 0..k {
            out[p * k + i] = jets.get(p, i, 0) - targets[p * k + i];
        }
    }
    out
}

/// All residuals of `source` on `sets`.
pub fn residuals(source: &dyn JetSource, spec: &ProblemSpec, sets: &TrainingSet) -> ResidualBundle {
    let full = interior_residuals_at(source, spec, &sets.interior.points);
    let (interior, interior_width, divergence) = if spec.is_euler() {
        let mut mom = Vec::with_capacity(full.len() / 3 * 2);
        let mut div = Vec::with_capacity(full.len() / 3);
        for r in full.chunks_exact(3) {
            mom.extend_from_slice(&r[..2]);
            div.push(r[2]);
        }
        (mom, 2, Some(div))
    } else {
        (full, 1, None)
    };
    ResidualBundle {
        interior,
        interior_width,
        divergence,
        spatial_boundary: boundary_residuals_at(source, spec, &sets.spatial_boundary),
        sb_width: spec.sb_components(),
        sb_faces: sets.spatial_boundary.faces.clone(),
        temporal_boundary: temporal_residuals_at(source, spec, &sets.temporal_boundary),
        tb_width: spec.tb_outputs(),
    }
}

fn check_family(spec: &ProblemSpec, family: &str) -> Result<()> {
    if spec.pde.family() != family {
        return Err(PinnError::InvalidArgument(format!("expected a {family} problem, got {}", spec.pde.family())));
    }
    Ok(())
}

/// Residuals of the semilinear heat equation.
pub fn heat_residuals(source: &dyn JetSource, spec: &ProblemSpec, sets: &TrainingSet) -> Result<ResidualBundle> {
    check_family(spec, "heat")?;
    Ok(residuals(source, spec, sets))
}

/// Residuals of a viscous scalar conservation law.
pub fn conservation_law_residuals(
    source: &dyn JetSource,
    spec: &ProblemSpec,
    sets: &TrainingSet,
) -> Result<ResidualBundle> {
    check_family(spec, "conservation_law")?;
    Ok(residuals(source, spec, sets))
}

/// Residuals of the incompressible Euler equations.
pub fn euler_residuals(source: &dyn JetSource, spec: &ProblemSpec, sets: &TrainingSet) -> Result<ResidualBundle> {
    check_family(spec, "euler")?;
    Ok(residuals(source, spec, sets))
}
