use rayon::prelude::*;

use super::jet::{backward_batch, forward_batch, JetBatch, JetChannels};
use super::NetworkParams;

/// Points per forward/backward chunk.
const CHUNK: usize = 256;

/// A scalar loss built from network jets at fixed point blocks plus an
/// optional term depending on the parameters directly.
///
/// Each block has its own channel set. A block's loss must be a sum over
/// chunks; `granularity` keeps coupled points (e.g. periodic pairs stored
/// consecutively) inside one chunk.
pub trait JetObjective: Sync {
    fn n_blocks(&self) -> usize;
    /// Row-major `n x input_dim` points of `block`.
    fn block_points(&self, block: usize) -> &[f64];
    fn block_channels(&self, block: usize) -> &JetChannels;
    fn block_granularity(&self, _block: usize) -> usize {
        1
    }
    /// Loss contribution of points `first .. first + jets.n_points()` in
    /// `block`. When `cotangent` is given, add `d loss / d jet` into it.
    fn block_loss(&self, block: usize, first: usize, jets: &JetBatch, cotangent: Option<&mut JetBatch>) -> f64;
    /// Term depending on the parameters only; adds its gradient into `grad`.
    fn param_loss(&self, _theta: &[f64], _grad: Option<&mut [f64]>) -> f64 {
        0.0
    }
}

fn chunks(objective: &dyn JetObjective, input_dim: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for block in 0..objective.n_blocks() {
        let n = objective.block_points(block).len() / input_dim;
        let g = objective.block_granularity(block).max(1);
        let size = (CHUNK / g).max(1) * g;
        let mut start = 0;
        while start < n {
            let end = (start + size).min(n);
            out.push((block, start, end));
            start = end;
        }
    }
    out
}

/// Loss value without gradient.
pub fn loss_value(params: &NetworkParams, objective: &dyn JetObjective) -> f64 {
    let d = params.input_dim();
    let parts: Vec<f64> = chunks(objective, d)
        .into_par_iter()
        .map(|(block, start, end)| {
            let pts = &objective.block_points(block)[start * d..end * d];
            let tape = forward_batch(params, pts, objective.block_channels(block));
            objective.block_loss(block, start, tape.output(), None)
        })
        .collect();
    parts.iter().sum::<f64>() + objective.param_loss(params.flat(), None)
}

/// Loss value and its exact gradient with respect to the flat parameters.
pub fn loss_gradient(params: &NetworkParams, objective: &dyn JetObjective) -> (f64, Vec<f64>) {
    let d = params.input_dim();
    let m = params.n_params();
    let parts: Vec<(f64, Vec<f64>)> = chunks(objective, d)
        .into_par_iter()
        .map(|(block, start, end)| {
            let channels = objective.block_channels(block);
            let pts = &objective.block_points(block)[start * d..end * d];
            let tape = forward_batch(params, pts, channels);
            let out = tape.output();
            let mut cot = JetBatch::zeros(channels.clone(), out.n_points(), out.n_outputs());
            let value = objective.block_loss(block, start, out, Some(&mut cot));
            let mut grad = vec![0.0; m];
            backward_batch(params, &tape, &cot, &mut grad);
            (value, grad)
        })
        .collect();
    let mut grad = vec![0.0; m];
    let mut total = 0.0;
    for (v, g) in parts {
        total += v;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    total += objective.param_loss(params.flat(), Some(&mut grad));
    (total, grad)
}
