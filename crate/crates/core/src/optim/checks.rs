use serde::Serialize;

use crate::error::Result;
use crate::net::WeightVector;

use super::dataset::Dataset;
use super::model::Model;
use super::ridge::outer_ridge_oracle;
use super::risk::{empirical_risk, risk_and_gradient};
use super::train::TrainTrace;

/// Slack allowed on the PL comparison.
const PL_TOLERANCE: f64 = 1e-9;
/// Relative slack on the descent inequality, covering rounding only.
const DESCENT_RTOL: f64 = 1e-9;

/// Outcome of the PL inequality `|grad_a F(a)|^2 >= 4 c3 (F(a) - F(a_opt))`
/// on the outer-weight subproblem.
#[derive(Clone, Debug, Serialize)]
pub struct PlCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub risk: f64,
    pub optimal_risk: f64,
    pub holds: bool,
}

impl PlCheck {
    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Evaluates the PL inequality at the outer weights of `w`, with `a_opt`
/// from the ridge normal equations.
pub fn check_pl(w: &WeightVector, data: &Dataset, c3: f64) -> Result<PlCheck> {
    let opt = outer_ridge_oracle(w, data, c3)?;
    let (risk, grad) = risk_and_gradient(w, data, c3)?;
    let lhs: f64 = grad[w.outer_range()].iter().map(|g| g * g).sum();
    let mut at_opt = w.clone();
    at_opt.outer_mut().copy_from_slice(&opt.coefficients);
    let optimal_risk = empirical_risk(&at_opt, data, c3)?;
    let rhs = 4.0 * c3 * (risk - optimal_risk);
    Ok(PlCheck { lhs, rhs, risk, optimal_risk, holds: lhs >= rhs - PL_TOLERANCE })
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentStep {
    pub step: usize,
    /// `F(a_k)`.
    pub risk: f64,
    /// `F(a_{k-1}) - |grad F(a_{k-1})|^2 / (2L)`.
    pub bound: f64,
    pub descent_holds: bool,
    /// `|a_k - a_0|`.
    pub drift: f64,
    /// `sqrt(2 k / L (F(a_0) - F(a_k)))`.
    pub drift_bound: f64,
    pub drift_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentReport {
    pub inverse_step: f64,
    pub steps: Vec<DescentStep>,
}

impl DescentReport {
    pub fn all_descent(&self) -> bool {
        self.steps.iter().all(|s| s.descent_holds)
    }

    pub fn all_drift(&self) -> bool {
        self.steps.iter().all(|s| s.drift_holds)
    }

    pub fn violations(&self) -> usize {
        self.steps.iter().filter(|s| !(s.descent_holds && s.drift_holds)).count()
    }
}

/// Checks the gradient descent conclusions along a recorded run:
///
/// * `F(a_k) <= F(a_{k-1}) - |grad F(a_{k-1})|^2 / (2L)`
/// * `|a_k - a_0| <= sqrt(2 k / L (F(a_0) - F(a_k)))`
///
/// Violations are reported, not treated as errors: for aggressive step sizes
/// the hypotheses behind them need not hold.
pub fn check_descent<M: Model>(trace: &TrainTrace<M>, l_n: f64) -> DescentReport {
    check_descent_series(&trace.risk, &trace.grad_norm, &trace.drift, l_n)
}

/// [`check_descent`] on raw series; `grad_norm[k]` is the gradient norm at `a_k`.
pub fn check_descent_series(risk: &[f64], grad_norm: &[f64], drift: &[f64], l_n: f64) -> DescentReport {
    let steps = (1..risk.len())
        .map(|k| {
            let prev = risk[k - 1];
            let bound = prev - grad_norm[k - 1].powi(2) / (2.0 * l_n);
            let descent_holds = risk[k] <= bound + DESCENT_RTOL * prev.abs();
            let gap = (risk[0] - risk[k]).max(0.0);
            let drift_bound = (2.0 * k as f64 / l_n * gap).sqrt();
            let drift_holds = drift[k] <= drift_bound * (1.0 + DESCENT_RTOL) + DESCENT_RTOL * risk[0].abs().sqrt();
            DescentStep { step: k, risk: risk[k], bound, descent_holds, drift: drift[k], drift_bound, drift_holds }
        })
        .collect();
    DescentReport { inverse_step: l_n, steps }
}
