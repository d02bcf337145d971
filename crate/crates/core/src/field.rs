//! Pointwise evaluation of vector fields on space-time points.

use crate::nn::{JetChannels, JetSource, NetworkParams};

/// A vector field `y -> R^m` that can be evaluated on batches of points.
pub trait Field: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    /// Values at row-major `n x input_dim` points, returned `n x output_dim`.
    fn eval(&self, points: &[f64]) -> Vec<f64>;
}

impl Field for NetworkParams {
    fn input_dim(&self) -> usize {
        NetworkParams::input_dim(self)
    }

    fn output_dim(&self) -> usize {
        NetworkParams::output_dim(self)
    }

    fn eval(&self, points: &[f64]) -> Vec<f64> {
        let d = NetworkParams::input_dim(self);
        let m = NetworkParams::output_dim(self);
        let jets = self.jet_batch(points, &JetChannels::value_only(d));
        let mut out = Vec::with_capacity(jets.n_points() * m);
        for p in 0..jets.n_points() {
            for i in 0..m {
                out.push(jets.get(p, i, 0));
            }
        }
        out
    }
}

impl<T: Field + ?Sized> Field for &T {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }

    fn eval(&self, points: &[f64]) -> Vec<f64> {
        (**self).eval(points)
    }
}

/// Field backed by a closure.
pub struct FnField<F> {
    input_dim: usize,
    output_dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> FnField<F> {
    pub fn new(input_dim: usize, output_dim: usize, f: F) -> Self {
        Self { input_dim, output_dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> Field for FnField<F> {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn eval(&self, points: &[f64]) -> Vec<f64> {
        points.chunks_exact(self.input_dim).flat_map(|y| (self.f)(y)).collect()
    }
}

/// Restricts a field to its first `k` outputs (e.g. velocity without
/// pressure).
pub struct FirstOutputs<'a> {
    pub inner: &'a dyn Field,
    pub k: usize,
}

impl Field for FirstOutputs<'_> {
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.k
    }

    fn eval(&self, points: &[f64]) -> Vec<f64> {
        let m = self.inner.output_dim();
        self.inner.eval(points).chunks_exact(m).flat_map(|v| v[..self.k].to_vec()).collect()
    }
}
