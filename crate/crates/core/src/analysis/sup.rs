//! Sampled sup-norms. Maxima over finite point sets are lower estimates of
//! the true suprema.

use rayon::prelude::*;

use crate::field::Field;
use crate::nn::{JetBatch, JetChannels, JetRead, JetSource};
use crate::sampling::SpaceTimeBox;

/// A truth that can be evaluated pointwise and differentiated.
pub trait Reference: JetSource + Field {}

impl<T: JetSource + Field + ?Sized> Reference for T {}

/// Finite-difference jets of a plain field. Central differences in the
/// interior of the box, one-sided at its faces.
pub struct FdJets<'a> {
    pub field: &'a dyn Field,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Step per input axis.
    pub step: Vec<f64>,
}

impl<'a> FdJets<'a> {
    /// Steps of `rel_step` times the box width on every axis.
    pub fn new(field: &'a dyn Field, geometry: &SpaceTimeBox, rel_step: f64) -> Self {
        let lower = geometry.lower_full();
        let upper = geometry.upper_full();
        let step = lower.iter().zip(&upper).map(|(l, u)| rel_step * (u - l)).collect();
        Self { field, lower, upper, step }
    }
}

impl JetSource for FdJets<'_> {
    fn input_dim(&self) -> usize {
        self.field.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.field.output_dim()
    }

    fn jet_batch(&self, points: &[f64], channels: &JetChannels) -> JetBatch {
        let d = self.field.input_dim();
        let m = self.field.output_dim();
        let n = points.len() / d;
        let mut out = JetBatch::zeros(channels.clone(), n, m);
        let centre = self.field.eval(points);
        for p in 0..n {
            for i in 0..m {
                out.set(p, i, 0, centre[p * m + i]);
            }
        }
        for &a in channels.tangents() {
            let h = self.step[a];
            let mut lo = points.to_vec();
            let mut hi = points.to_vec();
            let mut span = vec![0.0; n];
            for p in 0..n {
                let x = points[p * d + a];
                let l = (x - h).max(self.lower[a]);
                let u = (x + h).min(self.upper[a]);
                lo[p * d + a] = l;
                hi[p * d + a] = u;
                span[p] = u - l;
            }
            let fl = self.field.eval(&lo);
            let fh = self.field.eval(&hi);
            let tc = channels.tangent_channel(a).unwrap();
            let sc = channels.second_channel(a);
            for p in 0..n {
                for i in 0..m {
                    let k = p * m + i;
                    out.set(p, i, tc, if span[p] > 0.0 { (fh[k] - fl[k]) / span[p] } else { 0.0 });
                    if let Some(sc) = sc {
                        let (dl, dh) = (points[p * d + a] - lo[p * d + a], hi[p * d + a] - points[p * d + a]);
                        let v = if dl > 0.0 && dh > 0.0 {
                            2.0 * ((fh[k] - centre[k]) / dh - (centre[k] - fl[k]) / dl) / (dl + dh)
                        } else {
                            0.0
                        };
                        out.set(p, i, sc, v);
                    }
                }
            }
        }
        out
    }
}

impl Field for FdJets<'_> {
    fn input_dim(&self) -> usize {
        self.field.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.field.output_dim()
    }

    fn eval(&self, points: &[f64]) -> Vec<f64> {
        self.field.eval(points)
    }
}

const SUP_CHUNK: usize = 2048;

/// Maximum of `g(jet)` over the points.
pub fn sup_over<F>(source: &dyn JetSource, points: &[f64], channels: &JetChannels, g: F) -> f64
where
    F: Fn(&crate::nn::jet::PointJet<'_>) -> f64 + Sync,
{
    let d = source.input_dim();
    points
        .par_chunks(SUP_CHUNK * d)
        .map(|pts| {
            let jets = source.jet_batch(pts, channels);
            (0..jets.n_points()).map(|p| g(&jets.point(p))).fold(0.0_f64, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// `sup |u|` with `|.|` the Euclidean norm over the first `k` outputs.
pub fn sup_value(source: &dyn JetSource, points: &[f64], k: usize) -> f64 {
    let ch = JetChannels::value_only(source.input_dim());
    sup_over(source, points, &ch, |j| (0..k).map(|i| j.value(i).powi(2)).sum::<f64>().sqrt())
}

/// `sup |grad_x u|` (Euclidean, spatial axes only) over the first `k`
/// outputs.
pub fn sup_spatial_gradient(source: &dyn JetSource, points: &[f64], k: usize) -> f64 {
    let d = source.input_dim();
    let ch = JetChannels::first_order(d);
    sup_over(source, points, &ch, |j| {
        (0..k).flat_map(|i| (1..d).map(move |a| (i, a))).map(|(i, a)| j.d(i, a).powi(2)).sum::<f64>().sqrt()
    })
}

/// `sup max_{i,a} |d u_i / d x_a|` over the first `k` outputs.
pub fn sup_gradient_entry(source: &dyn JetSource, points: &[f64], k: usize) -> f64 {
    let d = source.input_dim();
    let ch = JetChannels::first_order(d);
    sup_over(source, points, &ch, |j| {
        (0..k).flat_map(|i| (1..d).map(move |a| (i, a))).map(|(i, a)| j.d(i, a).abs()).fold(0.0, f64::max)
    })
}

/// `sup |u_k|` for a single output `k`.
pub fn sup_output(source: &dyn JetSource, points: &[f64], k: usize) -> f64 {
    let ch = JetChannels::value_only(source.input_dim());
    sup_over(source, points, &ch, |j| j.value(k).abs())
}
