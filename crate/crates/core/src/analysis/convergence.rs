use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bounds::BoundReport;
use super::validation::ValidationReport;
use crate::error::Result;

/// One row of a convergence study: cumulative errors and the bound at a
/// given number of training points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_int: usize,
    /// Spatial and temporal boundary points (equal in the study).
    pub n_b: usize,
    pub e_t_bar: f64,
    pub gap: f64,
    /// Sum of the residual-spread terms of the bound.
    pub std_terms: f64,
    pub bound_total: f64,
    pub e_g_bar: f64,
}

impl ConvergenceRow {
    pub fn new(validation: &ValidationReport, bound: &BoundReport) -> Self {
        let std_terms = bound.terms.iter().filter(|t| t.name.starts_with("std_")).map(|t| t.value).sum();
        Self {
            n_int: validation.counts.n_int,
            n_b: validation.counts.n_sb,
            e_t_bar: validation.e_t_bar,
            gap: validation.validation_gap,
            std_terms,
            bound_total: bound.bound_total,
            e_g_bar: bound.measured_e_g.unwrap_or(f64::NAN),
        }
    }
}

pub const CONVERGENCE_HEADER: [&str; 7] = ["n_int", "n_b", "e_t_bar", "gap", "std_terms", "bound_total", "e_g_bar"];

pub fn write_convergence_csv_to<W: Write>(rows: &[ConvergenceRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CONVERGENCE_HEADER)?;
    for r in rows {
        out.write_record([
            r.n_int.to_string(),
            r.n_b.to_string(),
            r.e_t_bar.to_string(),
            r.gap.to_string(),
            r.std_terms.to_string(),
            r.bound_total.to_string(),
            r.e_g_bar.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_convergence_csv(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    write_convergence_csv_to(rows, std::fs::File::create(path)?)
}
