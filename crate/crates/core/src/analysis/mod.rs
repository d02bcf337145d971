//! Training errors, measured generalization errors, validation statistics
//! and computable a posteriori error bounds.

mod bounds;
mod convergence;
mod errors;
mod sup;
mod validation;
mod vorticity;

pub use bounds::{burgers_bound, euler_bound, heat_bound, ux_profile, BoundOptions, BoundReport, BoundTerm};
pub use convergence::{write_convergence_csv, write_convergence_csv_to, ConvergenceRow, CONVERGENCE_HEADER};
pub use errors::{
    generalization_error, problem_generalization_error, training_error, GeneralizationReport, TrainingErrorReport,
};
pub use sup::{sup_gradient_entry, sup_output, sup_spatial_gradient, sup_value, FdJets, Reference};
pub use validation::{validation_report, ComponentStats, ValidationReport, VALIDATION_DRAW_STRIDE};
pub use vorticity::vorticity_field;
