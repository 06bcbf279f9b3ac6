use rayon::prelude::*;

use crate::error::Result;
use crate::net::HyperParams;

use super::dataset::Dataset;
use super::model::Model;

/// Samples per work unit. Partial sums are formed per chunk and then combined
/// by a fixed pairwise tree, so results do not depend on the thread count.
const CHUNK: usize = 32;

struct Partial {
    sse: f64,
    grad: Vec<f64>,
}

fn chunk_partial<M: Model>(m: &M, data: &Dataset, range: std::ops::Range<usize>, with_grad: bool) -> Partial {
    let n = data.n() as f64;
    let mut scratch = vec![0.0; m.scratch_len()];
    let mut grad = if with_grad { vec![0.0; m.params().len()] } else { Vec::new() };
    let mut sse = 0.0;
    for i in range {
        let x = data.x(i);
        let residual = m.eval_into(x, &mut scratch) - data.y(i);
        sse += residual * residual;
        if with_grad {
            m.backprop_into(x, &mut scratch, 2.0 * residual / n, &mut grad);
        }
    }
    Partial { sse, grad }
}

fn tree_reduce(mut parts: Vec<Partial>) -> Partial {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.sse += b.sse;
                a.grad.iter_mut().zip(&b.grad).for_each(|(x, y)| *x += y);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().expect("dataset is nonempty")
}

fn evaluate<M: Model>(m: &M, data: &Dataset, c3: f64, with_grad: bool) -> Result<(f64, Vec<f64>)> {
    data.check_dim(m.input_dim())?;
    let n = data.n();
    let parts: Vec<Partial> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| chunk_partial(m, data, c * CHUNK..((c + 1) * CHUNK).min(n), with_grad))
        .collect();
    let Partial { sse, mut grad } = tree_reduce(parts);
    let params = m.params();
    let mut penalty = 0.0;
    for range in m.penalized() {
        for o in range {
            penalty += params[o] * params[o];
            if with_grad {
                grad[o] += 2.0 * c3 * params[o];
            }
        }
    }
    Ok((sse / n as f64 + c3 * penalty, grad))
}

/// `F_n(w) = (1/n) sum_i (Y_i - f_w(X_i))^2 + c3 sum_k (w_{1,1,k}^{(L)})^2`.
pub fn empirical_risk<M: Model>(w: &M, data: &Dataset, c3: f64) -> Result<f64> {
    evaluate(w, data, c3, false).map(|(r, _)| r)
}

/// Risk and flat gradient from one pass over the data.
pub fn risk_and_gradient<M: Model>(w: &M, data: &Dataset, c3: f64) -> Result<(f64, Vec<f64>)> {
    evaluate(w, data, c3, true)
}

/// Exact gradient of [`empirical_risk`], shaped like `w`.
pub fn gradient<M: Model>(w: &M, data: &Dataset, c3: f64) -> Result<M> {
    let (_, g) = risk_and_gradient(w, data, c3)?;
    Ok(w.with_params(&g))
}

/// One step `w - lambda_n grad F_n(w)`.
pub fn gd_step<M: Model>(w: &M, data: &Dataset, hp: &HyperParams) -> Result<M> {
    let (_, g) = risk_and_gradient(w, data, hp.c3)?;
    let lambda = hp.step_size();
    let mut next = w.clone();
    next.params_mut().iter_mut().zip(&g).for_each(|(p, gi)| *p -= lambda * gi);
    Ok(next)
}
