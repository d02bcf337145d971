//! Ready-made problems used by the experiments.

use std::f64::consts::PI;
use std::sync::Arc;

use super::exact::{
    rarefaction_initial_data, ExactSolution, Heat1dExact, HeatNdExact, RarefactionExact, TaylorVortexExact,
};
use super::flux::{FluxSpec, SemilinearSource};
use super::shear_layer::GridField;
use super::spec::{point_fn, BoundaryCondition, Pde, ProblemSpec};
use crate::error::Result;
use crate::sampling::SpaceTimeBox;

/// Linear heat equation on `[-1, 1]`, `T = 1`, data `-sin(pi x)`.
pub fn heat_1d() -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        name: "heat_1d".into(),
        geometry: SpaceTimeBox::cube(1.0, 1, -1.0, 1.0)?,
        output_dim: 1,
        boundary: BoundaryCondition::Dirichlet(point_fn(|_| vec![0.0])),
        pde: Pde::Heat { source: SemilinearSource::zero() },
        initial_data: point_fn(|x| vec![-(PI * x[0]).sin()]),
        exact: Some(Arc::new(Heat1dExact)),
    })
}

/// Linear heat equation on `[0, 1]^n`, `T = 1`, data `|x|^2 / n`, with
/// boundary values taken from the exact solution.
pub fn heat_nd(n: usize) -> Result<ProblemSpec> {
    let exact = HeatNdExact { spatial_dim: n, n: n as f64 };
    let g = exact;
    Ok(ProblemSpec {
        name: format!("heat_{n}d"),
        geometry: SpaceTimeBox::cube(1.0, n, 0.0, 1.0)?,
        output_dim: 1,
        boundary: BoundaryCondition::Dirichlet(point_fn(move |y| g.value(y))),
        pde: Pde::Heat { source: SemilinearSource::zero() },
        initial_data: point_fn(move |x| vec![x.iter().map(|v| v * v).sum::<f64>() / n as f64]),
        exact: Some(Arc::new(exact)),
    })
}

/// Burgers on `[-1, 1]`, `T = 1`, data `-sin(pi x)`, zero boundary values.
pub fn burgers_sine(nu: f64) -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        name: "burgers_sine".into(),
        geometry: SpaceTimeBox::cube(1.0, 1, -1.0, 1.0)?,
        output_dim: 1,
        boundary: BoundaryCondition::Dirichlet(point_fn(|_| vec![0.0])),
        pde: Pde::ConservationLaw { nu, flux: FluxSpec::burgers() },
        initial_data: point_fn(|x| vec![-(PI * x[0]).sin()]),
        exact: None,
    })
}

/// Burgers rarefaction on `[-1, 1]`, `T = 0.5`, step data `0 | 1` with
/// boundary values 0 at `x = -1` and 1 at `x = 1`. The inviscid problem
/// carries its self-similar exact solution.
pub fn burgers_rarefaction(nu: f64) -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        name: "burgers_rarefaction".into(),
        geometry: SpaceTimeBox::cube(0.5, 1, -1.0, 1.0)?,
        output_dim: 1,
        boundary: BoundaryCondition::Dirichlet(point_fn(|y| vec![rarefaction_initial_data(y[1])])),
        pde: Pde::ConservationLaw { nu, flux: FluxSpec::burgers() },
        initial_data: point_fn(|x| vec![rarefaction_initial_data(x[0])]),
        exact: (nu == 0.0).then(|| Arc::new(RarefactionExact) as Arc<dyn ExactSolution>),
    })
}

/// Translating Gaussian vortex on `[-8, 8]^2`, `T = 1`, periodic.
pub fn taylor_vortex(a_x: f64, a_y: f64) -> Result<ProblemSpec> {
    let exact = TaylorVortexExact { a_x, a_y };
    Ok(ProblemSpec {
        name: "taylor_vortex".into(),
        geometry: SpaceTimeBox::cube(1.0, 2, -8.0, 8.0)?,
        output_dim: 3,
        boundary: BoundaryCondition::Periodic,
        pde: Pde::Euler { forcing: None },
        initial_data: point_fn(move |x| exact.value(&[0.0, x[0], x[1]])[..2].to_vec()),
        exact: Some(Arc::new(exact)),
    })
}

/// Periodic Euler flow started from a gridded velocity field.
pub fn double_shear_layer(field: GridField, t_final: f64) -> Result<ProblemSpec> {
    let geometry = SpaceTimeBox::new(t_final, vec![0.0, 0.0], vec![field.lx, field.ly])?;
    let field = Arc::new(field);
    Ok(ProblemSpec {
        name: "double_shear_layer".into(),
        geometry,
        output_dim: 3,
        boundary: BoundaryCondition::Periodic,
        pde: Pde::Euler { forcing: None },
        initial_data: point_fn(move |x| field.sample(x[0], x[1]).to_vec()),
        exact: None,
    })
}
