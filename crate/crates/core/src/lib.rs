//! Physics-informed neural networks for the semilinear heat equation, viscous
//! scalar conservation laws and the 2D incompressible Euler equations, with
//! measured generalization errors and computable a posteriori error bounds.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod field;
pub mod nn;
pub mod problems;
pub mod reference;
pub mod sampling;
pub mod train;

pub use error::{PinnError, Result};
