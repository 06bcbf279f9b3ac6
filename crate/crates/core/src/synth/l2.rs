use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TargetFunction;
use crate::rng::{derive_seed, CounterRng};

/// Monte Carlo estimate of `int |m_n - m|^2 dP_X` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Squared `L2(P_X)` error of `estimate` against `m` on `n_mc` fresh
/// uniform points. The points depend only on `seed`, and the result is
/// bit-identical regardless of the thread count.
pub fn l2_error<F>(estimate: F, m: &TargetFunction, n_mc: usize, seed: u64) -> L2Estimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = m.d();
    let mut rng = CounterRng::new(derive_seed(seed, &[0x12e7]));
    let points: Vec<f64> = (0..n_mc * d).map(|_| rng.unit()).collect();
    let sq: Vec<f64> = points
        .par_chunks(d.max(1))
        .map(|x| {
            let e = estimate(x) - m.eval(x);
            e * e
        })
        .collect();
    let n = sq.len().max(1) as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = if sq.len() > 1 { sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    L2Estimate { mean, std_error: (var / n).sqrt(), samples: sq.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_target, TargetKind, TargetParams};

    #[test]
    fn linear_error_matches_closed_form() {
        // m(x) = x, estimate 0: int_0^1 x^2 dx = 1/3
        let params = TargetParams { coeffs: Some(vec![1.0]), ..Default::default() };
        let m = make_target(TargetKind::Linear, 1.0, 1.0, 1, &params).unwrap();
        let est = l2_error(|_| 0.0, &m, 100_000, 8);
        assert!((est.mean - 1.0 / 3.0).abs() < 4.0 * est.std_error);
        assert!(est.std_error < 2e-3);
    }

    #[test]
    fn repeatable() {
        let m = make_target(TargetKind::LipschitzCone, 1.0, 1.0, 2, &TargetParams::default()).unwrap();
        let a = l2_error(|x| x[0], &m, 5_000, 1);
        let b = l2_error(|x| x[0], &m, 5_000, 1);
        assert_eq!(a, b);
        assert_eq!(l2_error(|x| m.eval(x), &m, 100, 2).mean, 0.0);
    }
}
