use super::sup::Reference;
use crate::nn::{JetChannels, JetRead};

/// Vorticity `dv/dx - du/dy` of a 2D velocity field at row-major
/// `(t, x, y)` points.
pub fn vorticity_field(source: &dyn Reference, points: &[f64]) -> Vec<f64> {
    let jets = source.jet_batch(points, &JetChannels::first_order(3));
    (0..jets.n_points())
        .map(|p| {
            let j = jets.point(p);
            j.d(1, 1) - j.d(0, 2)
        })
        .collect()
}
