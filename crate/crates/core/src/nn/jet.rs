//! Forward-mode input jets with a reverse pass over parameters.
//!
//! A batch of `B` points is pushed through the network as one matrix per
//! layer of shape `width x (C * B)`. Column block 0 holds values, blocks
//! `1..=J` hold first derivatives along the requested input dimensions, and
//! the last `S` blocks hold pure second derivatives. Every layer is a single
//! GEMM; the activation couples the channels pointwise:
//!
//! ```text
//! z   = s(a)
//! z'  = s'(a) a'
//! z'' = s''(a) a'^2 + s'(a) a''
//! ```
//!
//! The reverse pass differentiates exactly these relations, so gradients of
//! any loss built from jets are exact up to rounding.

use super::NetworkParams;
use crate::error::{PinnError, Result};

/// Which derivative channels to propagate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetChannels {
    tangents: Vec<usize>,
    seconds: Vec<usize>,
    second_tangent: Vec<usize>,
    tangent_of_dim: Vec<Option<usize>>,
    second_of_dim: Vec<Option<usize>>,
}

impl JetChannels {
    /// `tangents`: input dimensions with first derivatives; `seconds`: input
    /// dimensions with pure second derivatives (each must also be a tangent).
    pub fn new(input_dim: usize, tangents: &[usize], seconds: &[usize]) -> Result<Self> {
        let mut tangent_of_dim = vec![None; input_dim];
        for (c, &d) in tangents.iter().enumerate() {
            if d >= input_dim || tangent_of_dim[d].is_some() {
                return Err(PinnError::InvalidArgument(format!("bad tangent dimension {d}")));
            }
            tangent_of_dim[d] = Some(c);
        }
        let mut second_of_dim = vec![None; input_dim];
        let mut second_tangent = Vec::with_capacity(seconds.len());
        for (c, &d) in seconds.iter().enumerate() {
            let t = tangent_of_dim
                .get(d)
                .copied()
                .flatten()
                .ok_or_else(|| PinnError::InvalidArgument(format!("second dimension {d} has no tangent")))?;
            if second_of_dim[d].is_some() {
                return Err(PinnError::InvalidArgument(format!("duplicate second dimension {d}")));
            }
            second_of_dim[d] = Some(c);
            second_tangent.push(t);
        }
        Ok(Self {
            tangents: tangents.to_vec(),
            seconds: seconds.to_vec(),
            second_tangent,
            tangent_of_dim,
            second_of_dim,
        })
    }

    pub fn value_only(input_dim: usize) -> Self {
        Self::new(input_dim, &[], &[]).unwrap()
    }

    /// Every first and pure second derivative.
    pub fn full(input_dim: usize) -> Self {
        let all: Vec<usize> = (0..input_dim).collect();
        Self::new(input_dim, &all, &all).unwrap()
    }

    pub fn first_order(input_dim: usize) -> Self {
        let all: Vec<usize> = (0..input_dim).collect();
        Self::new(input_dim, &all, &[]).unwrap()
    }

    pub fn input_dim(&self) -> usize {
        self.tangent_of_dim.len()
    }

    pub fn n_channels(&self) -> usize {
        1 + self.tangents.len() + self.seconds.len()
    }

    pub fn tangents(&self) -> &[usize] {
        &self.tangents
    }

    pub fn seconds(&self) -> &[usize] {
        &self.seconds
    }

    pub fn tangent_channel(&self, dim: usize) -> Option<usize> {
        self.tangent_of_dim[dim].map(|c| 1 + c)
    }

    pub fn second_channel(&self, dim: usize) -> Option<usize> {
        self.second_of_dim[dim].map(|c| 1 + self.tangents.len() + c)
    }
}

/// Jets of `m` outputs at `B` points, stored as `m x (C * B)` row-major.
#[derive(Debug, Clone)]
pub struct JetBatch {
    channels: JetChannels,
    n_points: usize,
    n_outputs: usize,
    data: Vec<f64>,
}

impl JetBatch {
    pub fn zeros(channels: JetChannels, n_points: usize, n_outputs: usize) -> Self {
        let len = n_outputs * channels.n_channels() * n_points;
        Self { channels, n_points, n_outputs, data: vec![0.0; len] }
    }

    pub fn channels(&self) -> &JetChannels {
        &self.channels
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    #[inline]
    fn idx(&self, point: usize, output: usize, channel: usize) -> usize {
        let cb = self.channels.n_channels() * self.n_points;
        output * cb + channel * self.n_points + point
    }

    #[inline]
    pub fn get(&self, point: usize, output: usize, channel: usize) -> f64 {
        self.data[self.idx(point, output, channel)]
    }

    #[inline]
    pub fn add(&mut self, point: usize, output: usize, channel: usize, v: f64) {
        let i = self.idx(point, output, channel);
        self.data[i] += v;
    }

    #[inline]
    pub fn set(&mut self, point: usize, output: usize, channel: usize, v: f64) {
        let i = self.idx(point, output, channel);
        self.data[i] = v;
    }

    pub fn point(&self, point: usize) -> PointJet<'_> {
        PointJet { batch: self, point }
    }

    pub fn point_mut(&mut self, point: usize) -> PointJetMut<'_> {
        PointJetMut { batch: self, point }
    }

    /// Copy one point out as a dense [`Jet`]; channels that were not
    /// propagated are zero.
    pub fn to_jet(&self, point: usize) -> Jet {
        let d = self.channels.input_dim();
        let m = self.n_outputs;
        let mut jet = Jet::zeros(m, d);
        let p = self.point(point);
        for i in 0..m {
            jet.value[i] = p.value(i);
            for j in 0..d {
                if self.channels.tangent_channel(j).is_some() {
                    jet.grad[i * d + j] = p.d(i, j);
                }
                if self.channels.second_channel(j).is_some() {
                    jet.hess_diag[i * d + j] = p.dd(i, j);
                }
            }
        }
        jet
    }
}

/// Read access to a single-point jet.
pub trait JetRead {
    fn value(&self, output: usize) -> f64;
    /// `d u_output / d y_dim`
    fn d(&self, output: usize, dim: usize) -> f64;
    /// `d^2 u_output / d y_dim^2`
    fn dd(&self, output: usize, dim: usize) -> f64;
}

/// Accumulating write access to the cotangent of a single-point jet.
pub trait JetWrite {
    fn add_value(&mut self, output: usize, v: f64);
    fn add_d(&mut self, output: usize, dim: usize, v: f64);
    fn add_dd(&mut self, output: usize, dim: usize, v: f64);
}

#[derive(Clone, Copy)]
pub struct PointJet<'a> {
    batch: &'a JetBatch,
    point: usize,
}

impl JetRead for PointJet<'_> {
    #[inline]
    fn value(&self, output: usize) -> f64 {
        self.batch.get(self.point, output, 0)
    }

    #[inline]
    fn d(&self, output: usize, dim: usize) -> f64 {
        let c = self.batch.channels.tangent_channel(dim).expect("tangent channel not propagated");
        self.batch.get(self.point, output, c)
    }

    #[inline]
    fn dd(&self, output: usize, dim: usize) -> f64 {
        let c = self.batch.channels.second_channel(dim).expect("second-derivative channel not propagated");
        self.batch.get(self.point, output, c)
    }
}

pub struct PointJetMut<'a> {
    batch: &'a mut JetBatch,
    point: usize,
}

impl JetWrite for PointJetMut<'_> {
    #[inline]
    fn add_value(&mut self, output: usize, v: f64) {
        self.batch.add(self.point, output, 0, v);
    }

    #[inline]
    fn add_d(&mut self, output: usize, dim: usize, v: f64) {
        let c = self.batch.channels.tangent_channel(dim).expect("tangent channel not propagated");
        self.batch.add(self.point, output, c, v);
    }

    #[inline]
    fn add_dd(&mut self, output: usize, dim: usize, v: f64) {
        let c = self.batch.channels.second_channel(dim).expect("second-derivative channel not propagated");
        self.batch.add(self.point, output, c, v);
    }
}

/// Value, Jacobian and pure second derivatives of all outputs at one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: Vec<f64>,
    /// `m x d` row-major, `grad[i * d + j] = d u_i / d y_j`.
    pub grad: Vec<f64>,
    /// `m x d` row-major, `hess_diag[i * d + j] = d^2 u_i / d y_j^2`.
    pub hess_diag: Vec<f64>,
    input_dim: usize,
}

impl Jet {
    pub fn zeros(n_outputs: usize, input_dim: usize) -> Self {
        Self {
            value: vec![0.0; n_outputs],
            grad: vec![0.0; n_outputs * input_dim],
            hess_diag: vec![0.0; n_outputs * input_dim],
            input_dim,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn n_outputs(&self) -> usize {
        self.value.len()
    }
}

impl JetRead for Jet {
    fn value(&self, output: usize) -> f64 {
        self.value[output]
    }

    fn d(&self, output: usize, dim: usize) -> f64 {
        self.grad[output * self.input_dim + dim]
    }

    fn dd(&self, output: usize, dim: usize) -> f64 {
        self.hess_diag[output * self.input_dim + dim]
    }
}

impl JetWrite for Jet {
    fn add_value(&mut self, output: usize, v: f64) {
        self.value[output] += v;
    }

    fn add_d(&mut self, output: usize, dim: usize, v: f64) {
        self.grad[output * self.input_dim + dim] += v;
    }

    fn add_dd(&mut self, output: usize, dim: usize, v: f64) {
        self.hess_diag[output * self.input_dim + dim] += v;
    }
}

/// Anything that can produce jets at a batch of points: trained networks,
/// analytic exact solutions, frozen evaluators.
pub trait JetSource: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    /// `points` is row-major `n x input_dim`.
    fn jet_batch(&self, points: &[f64], channels: &JetChannels) -> JetBatch;
}

/// Intermediate state of a batched forward pass, kept for the reverse pass.
pub struct Tape {
    channels: JetChannels,
    n_points: usize,
    /// Layer inputs `z_0 .. z_{K-1}`, each `d_k x (C * B)`.
    inputs: Vec<Vec<f64>>,
    /// Hidden pre-activations `a_1 .. a_{K-1}`.
    pre: Vec<Vec<f64>>,
    output: JetBatch,
}

impl Tape {
    pub fn output(&self) -> &JetBatch {
        &self.output
    }
}

/// `c = alpha * op(a) * op(b) + beta * c` on row-major slices, with optional
/// transposes expressed through strides.
#[allow(clippy::too_many_arguments)]
#[inline]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], a_trans: bool, b: &[f64], b_trans: bool, beta: f64, c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_trans { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_trans { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: slice lengths checked above; strides describe in-bounds
    // row-major (or transposed row-major) views of those slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Batched forward jet pass. `points` is row-major `n x input_dim`.
pub fn forward_batch(params: &NetworkParams, points: &[f64], channels: &JetChannels) -> Tape {
    let d_in = params.input_dim();
    assert_eq!(channels.input_dim(), d_in, "channel spec built for a different input dimension");
    assert_eq!(points.len() % d_in, 0, "point buffer is not a multiple of the input dimension");
    let b = points.len() / d_in;
    let c = channels.n_channels();
    let cb = c * b;
    let n_tan = channels.tangents.len();
    let act = params.activation();

    let mut z0 = vec![0.0; d_in * cb];
    for j in 0..d_in {
        let (center, hw) = match params.scaling() {
            Some(s) => (s.center[j], s.half_width[j]),
            None => (0.0, 1.0),
        };
        let row = &mut z0[j * cb..(j + 1) * cb];
        for p in 0..b {
            row[p] = (points[p * d_in + j] - center) / hw;
        }
        if let Some(t) = channels.tangent_of_dim[j] {
            row[(1 + t) * b..(2 + t) * b].fill(1.0 / hw);
        }
    }

    let n_layers = params.n_layers();
    let dims = params.layer_dims();
    let mut inputs = Vec::with_capacity(n_layers);
    let mut pre = Vec::with_capacity(n_layers - 1);
    inputs.push(z0);

    for k in 0..n_layers {
        let (rows, cols) = (dims[k + 1], dims[k]);
        let mut a = vec![0.0; rows * cb];
        gemm(rows, cols, cb, params.weight(k), false, &inputs[k], false, 0.0, &mut a);
        let bias = params.bias(k);
        for i in 0..rows {
            a[i * cb..i * cb + b].iter_mut().for_each(|v| *v += bias[i]);
        }
        if k + 1 == n_layers {
            let output = JetBatch { channels: channels.clone(), n_points: b, n_outputs: rows, data: a };
            return Tape { channels: channels.clone(), n_points: b, inputs, pre, output };
        }
        let mut z = vec![0.0; rows * cb];
        for i in 0..rows {
            let ar = &a[i * cb..(i + 1) * cb];
            let zr = &mut z[i * cb..(i + 1) * cb];
            for p in 0..b {
                let [s0, s1, s2, _] = act.derivatives(ar[p]);
                zr[p] = s0;
                for t in 0..n_tan {
                    zr[(1 + t) * b + p] = s1 * ar[(1 + t) * b + p];
                }
                for (s, &t) in channels.second_tangent.iter().enumerate() {
                    let at = ar[(1 + t) * b + p];
                    let col = (1 + n_tan + s) * b + p;
                    zr[col] = s2 * at * at + s1 * ar[col];
                }
            }
        }
        pre.push(a);
        inputs.push(z);
    }
    unreachable!("network has at least one layer")
}

/// Reverse pass: accumulates `d loss / d theta` into `grad` given the
/// cotangent of the output jets (same layout as [`Tape::output`]).
pub fn backward_batch(params: &NetworkParams, tape: &Tape, out_cotangent: &JetBatch, grad: &mut [f64]) {
    assert_eq!(grad.len(), params.n_params());
    let b = tape.n_points;
    let channels = &tape.channels;
    let cb = channels.n_channels() * b;
    let n_tan = channels.tangents.len();
    let n_layers = params.n_layers();
    let dims = params.layer_dims();
    let act = params.activation();

    let mut cot = out_cotangent.data.clone();
    for k in (0..n_layers).rev() {
        let (rows, cols) = (dims[k + 1], dims[k]);
        if k + 1 < n_layers {
            // cot currently holds the cotangent of z_{k+1}; map it to a_{k+1}.
            let a = &tape.pre[k];
            let mut abar = vec![0.0; rows * cb];
            for i in 0..rows {
                let ar = &a[i * cb..(i + 1) * cb];
                let zb = &cot[i * cb..(i + 1) * cb];
                let ab = &mut abar[i * cb..(i + 1) * cb];
                for p in 0..b {
                    let [_, s1, s2, s3] = act.derivatives(ar[p]);
                    let mut a0 = zb[p] * s1;
                    for t in 0..n_tan {
                        let col = (1 + t) * b + p;
                        a0 += zb[col] * s2 * ar[col];
                        ab[col] += zb[col] * s1;
                    }
                    for (s, &t) in channels.second_tangent.iter().enumerate() {
                        let tcol = (1 + t) * b + p;
                        let scol = (1 + n_tan + s) * b + p;
                        let at = ar[tcol];
                        let zs = zb[scol];
                        a0 += zs * (s3 * at * at + s2 * ar[scol]);
                        ab[tcol] += zs * 2.0 * s2 * at;
                        ab[scol] += zs * s1;
                    }
                    ab[p] = a0;
                }
            }
            cot = abar;
        }
        let (w_off, b_off) = params.layer_offset(k);
        gemm(rows, cb, cols, &cot, false, &tape.inputs[k], true, 1.0, &mut grad[w_off..b_off]);
        for i in 0..rows {
            grad[b_off + i] += cot[i * cb..i * cb + b].iter().sum::<f64>();
        }
        if k > 0 {
            let mut zbar = vec![0.0; cols * cb];
            gemm(cols, rows, cb, params.weight(k), true, &cot, false, 0.0, &mut zbar);
            cot = zbar;
        }
    }
}

/// Full jet (all first and pure second derivatives) at a single input.
pub fn forward_jet(params: &NetworkParams, y: &[f64]) -> Result<Jet> {
    if y.len() != params.input_dim() {
        return Err(PinnError::Shape { expected: params.input_dim(), got: y.len() });
    }
    let channels = JetChannels::full(params.input_dim());
    Ok(forward_batch(params, y, &channels).output.to_jet(0))
}

impl JetSource for NetworkParams {
    fn input_dim(&self) -> usize {
        NetworkParams::input_dim(self)
    }

    fn output_dim(&self) -> usize {
        NetworkParams::output_dim(self)
    }

    fn jet_batch(&self, points: &[f64], channels: &JetChannels) -> JetBatch {
        const CHUNK: usize = 512;
        let d = NetworkParams::input_dim(self);
        let n = points.len() / d;
        if n <= CHUNK {
            return forward_batch(self, points, channels).output;
        }
        let mut out = JetBatch::zeros(channels.clone(), n, NetworkParams::output_dim(self));
        let c = channels.n_channels();
        for start in (0..n).step_by(CHUNK) {
            let end = (start + CHUNK).min(n);
            let part = forward_batch(self, &points[start * d..end * d], channels).output;
            for i in 0..out.n_outputs {
                for ch in 0..c {
                    for p in 0..end - start {
                        out.set(start + p, i, ch, part.get(p, i, ch));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_params, Activation, InitScheme, InputScaling};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-3)
    }

    #[test]
    fn jet_value_matches_forward() {
        let p = init_params(3, &[3, 7, 5, 2], Activation::Tanh, InitScheme::XavierUniform).unwrap();
        let y = [0.2, -0.4, 0.9];
        let jet = forward_jet(&p, &y).unwrap();
        let plain = p.forward(&y).unwrap();
        for (a, b) in jet.value.iter().zip(&plain) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_network_has_zero_jet() {
        let p = NetworkParams::zeros(vec![2, 4, 1], Activation::Tanh).unwrap();
        let jet = forward_jet(&p, &[0.5, 0.1]).unwrap();
        assert!(jet.grad.iter().chain(&jet.hess_diag).all(|&v| v == 0.0));
    }

    #[test]
    fn scaled_input_jets_follow_chain_rule() {
        let p = init_params(1, &[2, 8, 1], Activation::Celu, InitScheme::XavierUniform)
            .unwrap()
            .with_scaling(InputScaling::from_box(&[0.0, -8.0], &[1.0, 8.0]))
            .unwrap();
        let y = [0.31, 2.2];
        let jet = forward_jet(&p, &y).unwrap();
        let h = 1e-5;
        for j in 0..2 {
            let mut yp = y;
            let mut ym = y;
            yp[j] += h;
            ym[j] -= h;
            let fd = (p.forward(&yp).unwrap()[0] - p.forward(&ym).unwrap()[0]) / (2.0 * h);
            assert!(rel_err(jet.d(0, j), fd) < 1e-6);
        }
    }

    #[test]
    fn partial_channels_agree_with_full() {
        let p = init_params(9, &[3, 6, 6, 2], Activation::Tanh, InitScheme::XavierUniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<f64> = (0..3 * 10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let partial = JetChannels::new(3, &[2, 0], &[0]).unwrap();
        let batch = forward_batch(&p, &pts, &partial);
        for i in 0..10 {
            let full = forward_jet(&p, &pts[3 * i..3 * i + 3]).unwrap();
            let pj = batch.output().point(i);
            for o in 0..2 {
                assert!((pj.value(o) - full.value(o)).abs() < 1e-14);
                assert!((pj.d(o, 0) - full.d(o, 0)).abs() < 1e-14);
                assert!((pj.d(o, 2) - full.d(o, 2)).abs() < 1e-14);
                assert!((pj.dd(o, 0) - full.dd(o, 0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn chunked_jet_batch_matches_single_pass() {
        let p = init_params(4, &[2, 5, 1], Activation::Tanh, InitScheme::XavierUniform).unwrap();
        let pts: Vec<f64> = (0..2 * 1100).map(|i| (i as f64 * 0.37).sin()).collect();
        let ch = JetChannels::full(2);
        let a = p.jet_batch(&pts, &ch);
        let b = forward_batch(&p, &pts, &ch).output;
        for i in [0, 511, 512, 1099] {
            assert!((a.get(i, 0, 3) - b.get(i, 0, 3)).abs() < 1e-13);
        }
    }

    #[test]
    fn channel_validation() {
        assert!(JetChannels::new(2, &[0], &[1]).is_err());
        assert!(JetChannels::new(2, &[0, 0], &[]).is_err());
        assert!(JetChannels::new(2, &[3], &[]).is_err());
    }
}
