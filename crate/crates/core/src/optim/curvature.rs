use crate::error::Result;
use crate::rng::CounterRng;

use super::dataset::Dataset;
use super::model::Model;
use super::risk::risk_and_gradient;

/// Largest Hessian eigenvalue magnitude of the empirical risk at `w`, by
/// power iteration on finite-difference Hessian-vector products.
///
/// Used to pick a desk-scale step size `1 / L` with `L` above the local
/// gradient Lipschitz constant.
pub fn estimate_curvature<M: Model>(w: &M, data: &Dataset, c3: f64, iters: usize, seed: u64) -> Result<f64> {
    let p = w.params().len();
    let mut rng = CounterRng::new(seed);
    let mut v: Vec<f64> = (0..p).map(|_| rng.uniform(-1.0, 1.0)).collect();
    normalize(&mut v);
    let eps = 1e-6;
    let mut plus = w.clone();
    let mut minus = w.clone();
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        for ((a, b), (base, dir)) in
            plus.params_mut().iter_mut().zip(minus.params_mut().iter_mut()).zip(w.params().iter().zip(&v))
        {
            *a = base + eps * dir;
            *b = base - eps * dir;
        }
        let (_, gp) = risk_and_gradient(&plus, data, c3)?;
        let (_, gm) = risk_and_gradient(&minus, data, c3)?;
        let mut hv: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        estimate = normalize(&mut hv);
        if estimate == 0.0 {
            break;
        }
        v = hv;
    }
    Ok(estimate)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}
