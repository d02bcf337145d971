//! Point generators and quadrature rules for collocation.

mod gauss;
mod geometry;
mod joe_kuo;
mod random;
mod rate;
mod rule;
mod sobol;
mod training_set;

pub use gauss::{gauss_legendre, gauss_legendre_composite, MAX_GAUSS_DIM};
pub use geometry::SpaceTimeBox;
pub use random::{fill_open_unit, open_unit, stream_rng, uniform_in_box, uniform_random, uniform_random_flat};
pub use rate::{empirical_rate, fit_rate, RateFit};
pub use rule::{QuadratureKind, QuadratureRule};
pub use sobol::{sobol, sobol_flat, SobolSequence};
pub use training_set::{
    allocate, build_training_set, random_box_points, BoundaryLayout, BoundarySet, SetCounts, TrainingSet,
    GAUSS_NODES_PER_CELL,
};
