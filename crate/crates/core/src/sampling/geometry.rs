use serde::{Deserialize, Serialize};

use crate::error::{PinnError, Result};

/// Space-time box `[0, T] x [lower, upper]`. Input vectors are laid out
/// as `(t, x_1, ..., x_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeBox {
    pub t_final: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SpaceTimeBox {
    pub fn new(t_final: f64, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if !(t_final > 0.0) || lower.is_empty() || lower.len() != upper.len() {
            return Err(PinnError::InvalidArgument("space-time box needs T > 0 and matching bounds".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(u > l)) {
            return Err(PinnError::InvalidArgument("space-time box has an empty axis".into()));
        }
        Ok(Self { t_final, lower, upper })
    }

    /// Unit cube `[0,1]^d` in space.
    pub fn cube(t_final: f64, d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(t_final, vec![lo; d], vec![hi; d])
    }

    pub fn spatial_dim(&self) -> usize {
        self.lower.len()
    }

    /// Space-time input dimension `d + 1`.
    pub fn input_dim(&self) -> usize {
        self.lower.len() + 1
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Lebesgue measure of D.
    pub fn spatial_volume(&self) -> f64 {
        (0..self.spatial_dim()).map(|a| self.width(a)).product()
    }

    /// Space-time volume `|D| T`.
    pub fn volume(&self) -> f64 {
        self.spatial_volume() * self.t_final
    }

    /// Number of faces of D. Face `2 * axis + side` has `x_axis` at the
    /// lower (`side = 0`) or upper (`side = 1`) bound.
    pub fn n_faces(&self) -> usize {
        2 * self.spatial_dim()
    }

    /// Surface measure of a face; in one dimension each face is a point of
    /// counting measure one.
    pub fn face_measure(&self, face: usize) -> f64 {
        let axis = face / 2;
        (0..self.spatial_dim()).filter(|&a| a != axis).map(|a| self.width(a)).product()
    }

    /// `|∂D|`.
    pub fn boundary_measure(&self) -> f64 {
        (0..self.n_faces()).map(|f| self.face_measure(f)).sum()
    }

    /// Lower space-time corner `(0, lower)`.
    pub fn lower_full(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.lower.iter().copied()).collect()
    }

    /// Upper space-time corner `(T, upper)`.
    pub fn upper_full(&self) -> Vec<f64> {
        std::iter::once(self.t_final).chain(self.upper.iter().copied()).collect()
    }

    /// True if the space-time point lies in the closed box.
    pub fn contains(&self, y: &[f64]) -> bool {
        let lo = self.lower_full();
        let hi = self.upper_full();
        y.len() == lo.len() && y.iter().zip(lo.iter().zip(&hi)).all(|(v, (l, h))| v >= l && v <= h)
    }
}
