//! Problem definitions: PDE residuals, initial and boundary data, exact
//! solutions and geometry.

pub mod catalog;
mod exact;
mod flux;
mod residual;
mod shear_layer;
mod spec;

pub use exact::{
    exact_heat_1d, exact_heat_nd, exact_taylor_vortex, rarefaction_initial_data, Analytic, ExactSolution, Heat1dExact,
    HeatNdExact, RarefactionExact, TaylorVortexExact,
};
pub use flux::{FluxSpec, ScalarFn, SemilinearSource};
pub use residual::{
    boundary_residuals_at, conservation_law_residuals, euler_residuals, heat_residuals, interior_residuals_at,
    residuals, temporal_residuals_at, weighted_sq_sum, ResidualBundle,
};
pub use shear_layer::GridField;
pub use spec::{point_fn, BoundaryCondition, Pde, PointFn, ProblemSpec};

#[cfg(test)]
mod tests;
