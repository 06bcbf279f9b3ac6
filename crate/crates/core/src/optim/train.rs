use std::io::Write;

use crate::error::{Error, Result};
use crate::net::{truncate, HyperParams};

use super::dataset::Dataset;
use super::model::Model;
use super::risk::risk_and_gradient;

pub const TRACE_CSV_VERSION: &str = "# overparam trace v1";

/// Per-step record of a gradient descent run.
///
/// Entry `t` of each series belongs to iterate `w^{(t)}`, `t = 0..=t_n`;
/// `grad_norm[t]` is the gradient at `w^{(t)}` (the one used for step
/// `t + 1`).
#[derive(Clone, Debug)]
pub struct TrainTrace<M> {
    pub risk: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub drift: Vec<f64>,
    pub final_weights: M,
    pub step_size: f64,
    pub beta: f64,
}

impl<M: Model> TrainTrace<M> {
    pub fn steps(&self) -> usize {
        self.risk.len() - 1
    }

    pub fn initial_risk(&self) -> f64 {
        self.risk[0]
    }

    pub fn final_risk(&self) -> f64 {
        *self.risk.last().expect("trace holds the initial state")
    }

    pub fn final_drift(&self) -> f64 {
        *self.drift.last().expect("trace holds the initial state")
    }

    /// The truncated estimate `x -> T_beta f_w(x)` at the final weights.
    pub fn estimator(&self) -> TruncatedEstimator<M> {
        TruncatedEstimator { model: self.final_weights.clone(), beta: self.beta }
    }

    /// CSV with columns `step,risk,grad_norm,drift`, preceded by a version
    /// comment and any extra `# key,value` metadata rows.
    pub fn write_csv<W: Write>(&self, mut out: W, metadata: &[(&str, String)]) -> Result<()> {
        writeln!(out, "{TRACE_CSV_VERSION}")?;
        for (k, v) in metadata {
            writeln!(out, "# {k},{v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "risk", "grad_norm", "drift"])?;
        for t in 0..self.risk.len() {
            w.write_record(&[
                t.to_string(),
                self.risk[t].to_string(),
                self.grad_norm[t].to_string(),
                self.drift[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `x -> T_beta f_w(x)`.
#[derive(Clone, Debug)]
pub struct TruncatedEstimator<M> {
    pub model: M,
    pub beta: f64,
}

impl<M: Model> TruncatedEstimator<M> {
    pub fn predict(&self, x: &[f64]) -> f64 {
        truncate(self.model.output(x), self.beta)
    }

    /// Like [`Self::predict`] with caller-provided scratch of length
    /// `model.scratch_len()`.
    pub fn predict_with(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        truncate(self.model.eval_into(x, scratch), self.beta)
    }
}

/// Runs `hp.t_n` full-batch gradient descent steps with step size
/// `1 / hp.l_n` from `w0`.
///
/// Aborts with [`Error::NonFiniteRisk`] as soon as a risk or gradient is not
/// finite.
pub fn train<M: Model>(w0: &M, data: &Dataset, hp: &HyperParams) -> Result<TrainTrace<M>> {
    let steps = usize::try_from(hp.t_n).map_err(|_| Error::InvalidHyperParams("t_n too large".into()))?;
    let lambda = hp.step_size();
    let start = w0.params().to_vec();
    let mut w = w0.clone();
    let mut trace = TrainTrace {
        risk: Vec::with_capacity(steps + 1),
        grad_norm: Vec::with_capacity(steps + 1),
        drift: Vec::with_capacity(steps + 1),
        final_weights: w0.clone(),
        step_size: lambda,
        beta: hp.beta(),
    };
    for t in 0..=steps {
        let (risk, g) = risk_and_gradient(&w, data, hp.c3)?;
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !risk.is_finite() || !norm.is_finite() {
            return Err(Error::NonFiniteRisk { step: t });
        }
        let drift = w.params().iter().zip(&start).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        trace.risk.push(risk);
        trace.grad_norm.push(norm);
        trace.drift.push(drift);
        if t < steps {
            w.params_mut().iter_mut().zip(&g).for_each(|(p, gi)| *p -= lambda * gi);
        }
    }
    trace.final_weights = w;
    Ok(trace)
}
