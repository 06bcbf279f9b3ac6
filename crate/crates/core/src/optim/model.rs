use std::ops::Range;

use crate::net::{backprop_subnet, eval_subnet, WeightVector};

/// A parametric regression function trainable by [`super::train`].
///
/// Implementations keep all parameters in one flat vector; the ridge penalty
/// applies to the entries in [`Model::penalized`].
pub trait Model: Clone + Send + Sync {
    fn input_dim(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    /// Ranges of the outer weights.
    fn penalized(&self) -> Vec<Range<usize>>;

    /// Scratch length needed by [`Model::eval_into`] and [`Model::backprop_into`].
    fn scratch_len(&self) -> usize;

    /// Output at `x`; leaves whatever `backprop_into` needs in `scratch`.
    fn eval_into(&self, x: &[f64], scratch: &mut [f64]) -> f64;

    /// Adds `upstream * d(output)/d(params)` to `grad`. `scratch` must come
    /// from a preceding `eval_into` at the same `x`.
    fn backprop_into(&self, x: &[f64], scratch: &mut [f64], upstream: f64, grad: &mut [f64]);

    fn output(&self, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.scratch_len()];
        self.eval_into(x, &mut scratch)
    }

    fn penalty(&self) -> f64 {
        let p = self.params();
        self.penalized().into_iter().flat_map(|r| p[r].iter()).map(|a| a * a).sum()
    }

    /// Copy of `self` with every parameter replaced by `values`.
    fn with_params(&self, values: &[f64]) -> Self {
        let mut m = self.clone();
        m.params_mut().copy_from_slice(values);
        m
    }
}

impl Model for WeightVector {
    fn input_dim(&self) -> usize {
        self.topology().d
    }

    fn params(&self) -> &[f64] {
        self.as_slice()
    }

    fn params_mut(&mut self) -> &mut [f64] {
        self.as_mut_slice()
    }

    fn penalized(&self) -> Vec<Range<usize>> {
        vec![self.outer_range()]
    }

    fn scratch_len(&self) -> usize {
        let t = self.topology();
        t.subnets * t.activations_per_subnet() + 2 * t.width
    }

    fn eval_into(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        let t = self.topology();
        let per = t.activations_per_subnet();
        let mut sum = 0.0;
        for (k, a) in self.outer().iter().enumerate() {
            let b = eval_subnet(t, self.subnet(k), x, &mut scratch[k * per..(k + 1) * per]);
            sum += a * b;
        }
        sum
    }

    fn backprop_into(&self, x: &[f64], scratch: &mut [f64], upstream: f64, grad: &mut [f64]) {
        let t = *self.topology();
        let per = t.activations_per_subnet();
        let block = t.block_len();
        let outer = t.outer_offset();
        let (acts, delta) = scratch.split_at_mut(t.subnets * per);
        for (k, &a) in self.outer().iter().enumerate() {
            let act = &acts[k * per..(k + 1) * per];
            grad[outer + k] += upstream * act[per - 1];
            let through = upstream * a;
            if through != 0.0 {
                backprop_subnet(&t, self.subnet(k), x, act, through, &mut grad[k * block..(k + 1) * block], delta);
            }
        }
    }
}
