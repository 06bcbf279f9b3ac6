use crate::error::{Error, Result};

use super::topology::Topology;
use super::weights::WeightVector;

/// Inputs beyond this magnitude are clamped before exponentiation, so the
/// result stays in `[sigma(-700), 1]` with `sigma(-700)` about `1e-304`.
const SIGMA_CLAMP: f64 = 700.0;

/// Logistic squasher `1 / (1 + e^{-x})`.
#[inline]
pub fn sigma(x: f64) -> f64 {
    let x = x.clamp(-SIGMA_CLAMP, SIGMA_CLAMP);
    1.0 / (1.0 + (-x).exp())
}

/// `T_beta z = max(-beta, min(beta, z))`.
#[inline]
pub fn truncate(z: f64, beta: f64) -> f64 {
    debug_assert!(beta > 0.0);
    z.clamp(-beta, beta)
}

/// Runs one subnetwork on `x`, writing its hidden activations into `act`
/// (layout of [`Activations`]) and returning the output unit value.
pub(crate) fn eval_subnet(topo: &Topology, block: &[f64], x: &[f64], act: &mut [f64]) -> f64 {
    let d = topo.d;
    let r = topo.width;
    let last = topo.depth - 1;

    let rows0 = topo.rows(0);
    for i in 0..rows0 {
        let row = &block[i * (d + 1)..(i + 1) * (d + 1)];
        let mut z = row[0];
        for (w, xj) in row[1..].iter().zip(x) {
            z += w * xj;
        }
        act[i] = sigma(z);
    }

    for l in 1..=last {
        let base = topo.level_offset(l);
        let (prev, cur) = act.split_at_mut(l * r);
        let prev = &prev[(l - 1) * r..];
        for i in 0..topo.rows(l) {
            let row = &block[base + i * (r + 1)..base + (i + 1) * (r + 1)];
            let mut z = row[0];
            for (w, f) in row[1..].iter().zip(prev) {
                z += w * f;
            }
            cur[i] = sigma(z);
        }
    }
    act[last * r]
}

/// Accumulates `upstream * d(output)/d(weights)` of one subnetwork into
/// `grad` (a block of the same layout as `block`). `act` must hold the
/// activations from [`eval_subnet`] for the same input; `delta` is scratch of
/// length at least `2 * width`.
pub(crate) fn backprop_subnet(
    topo: &Topology,
    block: &[f64],
    x: &[f64],
    act: &[f64],
    upstream: f64,
    grad: &mut [f64],
    delta: &mut [f64],
) {
    let d = topo.d;
    let r = topo.width;
    let last = topo.depth - 1;
    let (cur, next) = delta.split_at_mut(r);

    // derivative w.r.t. the pre-activation of the output unit
    let out = act[last * r];
    cur[0] = upstream * out * (1.0 - out);
    let mut n_cur = 1;

    for l in (1..=last).rev() {
        let base = topo.level_offset(l);
        let prev = &act[(l - 1) * r..l * r];
        next[..r].iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n_cur {
            let g = cur[i];
            if g == 0.0 {
                continue;
            }
            let row = base + i * (r + 1);
            grad[row] += g;
            for j in 0..r {
                grad[row + 1 + j] += g * prev[j];
                next[j] += g * block[row + 1 + j];
            }
        }
        for j in 0..r {
            cur[j] = next[j] * prev[j] * (1.0 - prev[j]);
        }
        n_cur = r;
    }

    for i in 0..topo.rows(0) {
        let g = cur[i];
        if g == 0.0 {
            continue;
        }
        let row = i * (d + 1);
        grad[row] += g;
        for j in 0..d {
            grad[row + 1 + j] += g * x[j];
        }
    }
}

/// Network output `f_w(x) = sum_k w_{1,1,k}^{(L)} f_{k,1}^{(L)}(x)`.
pub fn forward(w: &WeightVector, x: &[f64]) -> Result<f64> {
    let topo = w.topology();
    check_dim(topo, x)?;
    let mut act = vec![0.0; topo.activations_per_subnet()];
    let mut sum = 0.0;
    for (k, a) in w.outer().iter().enumerate() {
        sum += a * eval_subnet(topo, w.subnet(k), x, &mut act);
    }
    Ok(sum)
}

/// Every unit value `f_{k,i}^{(l)}(x)` of one forward pass.
///
/// Per subnetwork the tableau holds `width` values for each hidden layer
/// `1..depth` followed by the single output unit of layer `depth`.
#[derive(Clone, Debug)]
pub struct Activations {
    topology: Topology,
    values: Vec<f64>,
}

impl Activations {
    /// `f_{k,i}^{(l)}` 1-based: `k`, `i`, `l`.
    pub fn value(&self, k: usize, i: usize, l: usize) -> f64 {
        let t = &self.topology;
        assert!((1..=t.subnets).contains(&k) && (1..=t.depth).contains(&l));
        assert!(if l == t.depth { i == 1 } else { (1..=t.width).contains(&i) });
        self.values[(k - 1) * t.activations_per_subnet() + (l - 1) * t.width + i - 1]
    }

    /// Output units `f_{k,1}^{(L)}` for all subnetworks.
    pub fn outputs(&self) -> Vec<f64> {
        let t = &self.topology;
        (1..=t.subnets).map(|k| self.value(k, 1, t.depth)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Combines the output units with outer weights.
    pub fn combine(&self, outer: &[f64]) -> f64 {
        self.outputs().iter().zip(outer).map(|(b, a)| a * b).sum()
    }
}

pub fn forward_activations(w: &WeightVector, x: &[f64]) -> Result<Activations> {
    let topo = *w.topology();
    check_dim(&topo, x)?;
    let per = topo.activations_per_subnet();
    let mut values = vec![0.0; per * topo.subnets];
    for (k, act) in values.chunks_mut(per).enumerate() {
        eval_subnet(&topo, w.subnet(k), x, act);
    }
    Ok(Activations { topology: topo, values })
}

fn check_dim(topo: &Topology, x: &[f64]) -> Result<()> {
    if x.len() != topo.d {
        return Err(Error::DimensionMismatch { expected: topo.d, got: x.len() });
    }
    Ok(())
}
