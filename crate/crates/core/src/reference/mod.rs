//! Reference solutions where no closed form exists.

mod fv;

pub use fv::{fv_solve, fv_solve_with_slices, sample_reference, FvGrid, FvSolver, DEFAULT_SLICES};

#[cfg(test)]
mod tests;
