use std::fmt;
use std::sync::Arc;

use super::exact::ExactSolution;
use super::flux::{FluxSpec, SemilinearSource};
use crate::sampling::{BoundaryLayout, SpaceTimeBox};

/// Function of a point returning a vector (initial data, boundary data,
/// forcing).
pub type PointFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

pub fn point_fn(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> PointFn {
    Arc::new(f)
}

/// Boundary condition on the spatial boundary.
#[derive(Clone)]
pub enum BoundaryCondition {
    /// `u = g(t, x)` on the boundary.
    Dirichlet(PointFn),
    /// Values match on opposite faces.
    Periodic,
    /// Normal velocity vanishes.
    NoPenetration,
}

impl BoundaryCondition {
    pub fn layout(&self) -> BoundaryLayout {
        match self {
            Self::Periodic => BoundaryLayout::PeriodicPairs,
            _ => BoundaryLayout::Faces,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Dirichlet(_) => "dirichlet",
            Self::Periodic => "periodic",
            Self::NoPenetration => "no_penetration",
        }
    }
}

/// The PDE family and its coefficients.
#[derive(Clone)]
pub enum Pde {
    /// `u_t - Δu - f(u) = 0`.
    Heat { source: SemilinearSource },
    /// `u_t + f(u)_x - nu u_xx = 0` in one space dimension.
    ConservationLaw { nu: f64, flux: FluxSpec },
    /// `u_t + (u·∇)u + ∇p = f`, `div u = 0` in two space dimensions.
    Euler { forcing: Option<PointFn> },
}

impl Pde {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Heat { .. } => "heat",
            Self::ConservationLaw { .. } => "conservation_law",
            Self::Euler { .. } => "euler",
        }
    }
}

/// A complete initial-boundary value problem on a space-time box.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub geometry: SpaceTimeBox,
    /// Network outputs: 1 for scalar problems, 3 `(u, v, p)` for Euler.
    pub output_dim: usize,
    pub boundary: BoundaryCondition,
    pub pde: Pde,
    /// `x -> u(0, x)`; for Euler only the velocity is prescribed.
    pub initial_data: PointFn,
    pub exact: Option<Arc<dyn ExactSolution>>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("geometry", &self.geometry)
            .field("output_dim", &self.output_dim)
            .field("boundary", &self.boundary.name())
            .field("pde", &self.pde.family())
            .field("exact", &self.exact)
            .finish()
    }
}

impl ProblemSpec {
    pub fn spatial_dim(&self) -> usize {
        self.geometry.spatial_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.geometry.input_dim()
    }

    pub fn t_final(&self) -> f64 {
        self.geometry.t_final
    }

    /// Viscosity of a conservation law, zero otherwise.
    pub fn nu(&self) -> f64 {
        match &self.pde {
            Pde::ConservationLaw { nu, .. } => *nu,
            _ => 0.0,
        }
    }

    pub fn flux(&self) -> Option<&FluxSpec> {
        match &self.pde {
            Pde::ConservationLaw { flux, .. } => Some(flux),
            _ => None,
        }
    }

    pub fn is_euler(&self) -> bool {
        matches!(self.pde, Pde::Euler { .. })
    }

    /// Number of outputs with prescribed initial data.
    pub fn tb_outputs(&self) -> usize {
        if self.is_euler() {
            self.spatial_dim()
        } else {
            self.output_dim
        }
    }

    /// Outputs that are compared against the truth in the generalization
    /// error (velocity only for Euler).
    pub fn error_outputs(&self) -> usize {
        self.tb_outputs()
    }
}
