use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{PinnError, Result};

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InitScheme {
    /// `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`, zero biases.
    #[default]
    XavierUniform,
}

/// Fixed affine map applied to inputs before the first layer:
/// `z = (y - center) / half_width`. Not trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaling {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
}

impl InputScaling {
    pub fn from_box(lower: &[f64], upper: &[f64]) -> Self {
        let center = lower.iter().zip(upper).map(|(a, b)| 0.5 * (a + b)).collect();
        let half_width = lower.iter().zip(upper).map(|(a, b)| 0.5 * (b - a)).collect();
        Self { center, half_width }
    }
}

/// Dense feed-forward network parameters.
///
/// All trainable parameters live in one flat vector laid out as
/// `W_1, b_1, W_2, b_2, ...` with each `W_k` row-major of shape
/// `d_{k+1} x d_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    layer_dims: Vec<usize>,
    activation: Activation,
    theta: Vec<f64>,
    offsets: Vec<(usize, usize)>,
    scaling: Option<InputScaling>,
}

/// Number of trainable parameters for the given layer sizes.
pub fn parameter_count(layer_dims: &[usize]) -> usize {
    layer_dims.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

fn validate_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.is_empty() {
        return Err(PinnError::InvalidArchitecture("empty layer_dims".into()));
    }
    if layer_dims.len() < 3 {
        return Err(PinnError::InvalidArchitecture(format!(
            "need input, at least one hidden and an output layer, got {:?}",
            layer_dims
        )));
    }
    if layer_dims.iter().any(|&d| d == 0) {
        return Err(PinnError::InvalidArchitecture(format!("layer sizes must be positive, got {:?}", layer_dims)));
    }
    Ok(())
}

fn layer_offsets(layer_dims: &[usize]) -> Vec<(usize, usize)> {
    let mut offsets = Vec::with_capacity(layer_dims.len() - 1);
    let mut at = 0;
    for w in layer_dims.windows(2) {
        let w_off = at;
        at += w[0] * w[1];
        offsets.push((w_off, at));
        at += w[1];
    }
    offsets
}

impl NetworkParams {
    pub fn from_flat(layer_dims: Vec<usize>, activation: Activation, theta: Vec<f64>) -> Result<Self> {
        validate_dims(&layer_dims)?;
        let expected = parameter_count(&layer_dims);
        if theta.len() != expected {
            return Err(PinnError::Shape { expected, got: theta.len() });
        }
        let offsets = layer_offsets(&layer_dims);
        Ok(Self { layer_dims, activation, theta, offsets, scaling: None })
    }

    pub fn zeros(layer_dims: Vec<usize>, activation: Activation) -> Result<Self> {
        let n = parameter_count(&layer_dims);
        Self::from_flat(layer_dims, activation, vec![0.0; n])
    }

    pub fn with_scaling(mut self, scaling: InputScaling) -> Result<Self> {
        let d = self.input_dim();
        if scaling.center.len() != d || scaling.half_width.len() != d {
            return Err(PinnError::Shape { expected: d, got: scaling.center.len() });
        }
        if scaling.half_width.iter().any(|&h| !(h > 0.0)) {
            return Err(PinnError::InvalidArgument("input half-widths must be positive".into()));
        }
        self.scaling = Some(scaling);
        Ok(self)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn scaling(&self) -> Option<&InputScaling> {
        self.scaling.as_ref()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Number of affine maps (hidden layers plus the output layer).
    pub fn n_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    pub fn flat(&self) -> &[f64] {
        &self.theta
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.theta
    }

    /// Replace the parameter vector, keeping architecture and scaling.
    pub fn with_flat(&self, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != self.theta.len() {
            return Err(PinnError::Shape { expected: self.theta.len(), got: theta.len() });
        }
        Ok(Self { theta, ..self.clone() })
    }

    pub fn weight(&self, layer: usize) -> &[f64] {
        let (w, b) = self.offsets[layer];
        &self.theta[w..b]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let (_, b) = self.offsets[layer];
        &self.theta[b..b + self.layer_dims[layer + 1]]
    }

    /// `(weight_start, bias_start)` of `layer` inside the flat vector.
    pub fn layer_offset(&self, layer: usize) -> (usize, usize) {
        self.offsets[layer]
    }

    /// Mask over the flat vector: `true` for weight-matrix entries.
    pub fn weight_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.theta.len()];
        for &(w, b) in &self.offsets {
            mask[w..b].iter_mut().for_each(|m| *m = true);
        }
        mask
    }

    /// Plain evaluation of the network at one input.
    pub fn forward(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.input_dim() {
            return Err(PinnError::Shape { expected: self.input_dim(), got: y.len() });
        }
        let mut z: Vec<f64> = match &self.scaling {
            Some(s) => y.iter().zip(s.center.iter().zip(&s.half_width)).map(|(v, (c, h))| (v - c) / h).collect(),
            None => y.to_vec(),
        };
        let n = self.n_layers();
        for k in 0..n {
            let (rows, cols) = (self.layer_dims[k + 1], self.layer_dims[k]);
            let w = self.weight(k);
            let b = self.bias(k);
            let mut next = b.to_vec();
            for (i, out) in next.iter_mut().enumerate() {
                let row = &w[i * cols..(i + 1) * cols];
                *out += row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
            }
            if k + 1 < n {
                next.iter_mut().for_each(|v| *v = self.activation.value(*v));
            }
            debug_assert_eq!(next.len(), rows);
            z = next;
        }
        Ok(z)
    }
}

/// Seeded initialization of a network with the given architecture.
pub fn init_params(
    seed: u64,
    layer_dims: &[usize],
    activation: Activation,
    scheme: InitScheme,
) -> Result<NetworkParams> {
    validate_dims(layer_dims)?;
    let mut params = NetworkParams::zeros(layer_dims.to_vec(), activation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match scheme {
        InitScheme::XavierUniform => {
            for k in 0..params.n_layers() {
                let (fan_in, fan_out) = (layer_dims[k], layer_dims[k + 1]);
                let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-a, a);
                let (w, b) = params.layer_offset(k);
                for v in &mut params.theta[w..b] {
                    *v = dist.sample(&mut rng);
                }
            }
        }
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parameter_counts() {
        assert_eq!(parameter_count(&[1, 4, 1]), 13);
        assert_eq!(parameter_count(&[2, 20, 20, 20, 20, 3]), 1383);
        assert_eq!(init_params(0, &[1, 4, 1], Activation::Tanh, InitScheme::XavierUniform).unwrap().n_params(), 13);
    }

    #[test]
    fn seeded_init_is_deterministic_and_bounded() {
        let dims = [3, 16, 16, 2];
        let a = init_params(7, &dims, Activation::Tanh, InitScheme::XavierUniform).unwrap();
        let b = init_params(7, &dims, Activation::Tanh, InitScheme::XavierUniform).unwrap();
        let c = init_params(8, &dims, Activation::Tanh, InitScheme::XavierUniform).unwrap();
        assert_eq!(a.flat(), b.flat());
        assert_ne!(a.flat(), c.flat());
        for k in 0..a.n_layers() {
            let bound = (6.0 / (dims[k] + dims[k + 1]) as f64).sqrt();
            assert!(a.weight(k).iter().all(|w| w.abs() <= bound));
            assert!(a.bias(k).iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn invalid_architectures() {
        assert!(matches!(
            init_params(0, &[], Activation::Tanh, InitScheme::XavierUniform),
            Err(PinnError::InvalidArchitecture(_))
        ));
        assert!(init_params(0, &[2, 1], Activation::Tanh, InitScheme::XavierUniform).is_err());
        assert!(init_params(0, &[2, 0, 1], Activation::Tanh, InitScheme::XavierUniform).is_err());
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = NetworkParams::zeros(vec![3, 5, 5, 2], Activation::Tanh).unwrap();
        assert_eq!(p.forward(&[0.3, -1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_tanh_network_at_origin() {
        // W = I, b = 0 in both layers
        let theta = vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let p = NetworkParams::from_flat(vec![2, 2, 2], Activation::Tanh, theta).unwrap();
        assert_eq!(p.forward(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let out = p.forward(&[0.5, -0.25]).unwrap();
        assert!((out[0] - 0.5f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let p = NetworkParams::zeros(vec![2, 3, 1], Activation::Tanh).unwrap();
        assert!(matches!(p.forward(&[1.0]), Err(PinnError::Shape { expected: 2, got: 1 })));
    }

    proptest! {
        #[test]
        fn parameter_count_matches_layout(dims in proptest::collection::vec(1usize..12, 3..7)) {
            let p = NetworkParams::zeros(dims.clone(), Activation::Tanh).unwrap();
            let manual: usize = (0..dims.len() - 1).map(|k| (dims[k] + 1) * dims[k + 1]).sum();
            prop_assert_eq!(p.n_params(), manual);
            let mask = p.weight_mask();
            let n_weights: usize = (0..dims.len() - 1).map(|k| dims[k] * dims[k + 1]).sum();
            prop_assert_eq!(mask.iter().filter(|m| **m).count(), n_weights);
        }

        #[test]
        fn flat_round_trip(seed in 0u64..1000) {
            let p = init_params(seed, &[2, 6, 3], Activation::Celu, InitScheme::XavierUniform).unwrap();
            let q = NetworkParams::from_flat(p.layer_dims().to_vec(), p.activation(), p.flat().to_vec()).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
