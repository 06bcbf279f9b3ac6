use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{DeskOverrides, HyperParams};
use crate::synth::{NoiseModel, TargetFunction, TargetSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Plain,
    Interaction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    /// Interaction order, required for the interaction estimator.
    #[serde(default)]
    pub d_star: Option<usize>,
    pub depth: usize,
    pub width: usize,
    /// Parallel networks (per group for the interaction estimator).
    pub subnets: usize,
    /// Grows the network count with the sample size:
    /// `K_n = max(subnets, ceil(subnets_per_n * n))`.
    #[serde(default)]
    pub subnets_per_n: Option<f64>,
}

impl EstimatorSpec {
    /// Network count used at sample size `n`.
    pub fn subnets_at(&self, n: usize) -> usize {
        match self.subnets_per_n {
            Some(rate) => self.subnets.max((rate * n as f64).ceil() as usize),
            None => self.subnets,
        }
    }
}

/// How the inverse step size `L_n` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LnRule {
    Fixed {
        value: f64,
    },
    /// `max(safety * L_est, 2 t_n F_n(w0) / (ln n)^2)` where `L_est` is a
    /// power-iteration curvature estimate at the initial weights. The second
    /// term keeps the drift bound `sqrt(2 t_n F_n(w0) / L_n) <= ln n`; it is
    /// dropped when `drift_consistent` is false.
    Auto {
        safety: f64,
        #[serde(default = "yes")]
        drift_consistent: bool,
        #[serde(default = "default_power_iters")]
        power_iters: usize,
    },
}

fn yes() -> bool {
    true
}

fn default_power_iters() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperConfig {
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Defaults to the noise model's moment constant.
    #[serde(default)]
    pub c5: Option<f64>,
    pub c6: f64,
    /// Defaults to `1 / (1 + d)`, with `d*` in place of `d` for interaction.
    #[serde(default)]
    pub tau: Option<f64>,
    pub l_n: LnRule,
    /// Step count; defaults to `ceil(c6 L_n ln n)`.
    #[serde(default)]
    pub t_n: Option<u64>,
}

fn one() -> f64 {
    1.0
}

fn default_n_mc() -> usize {
    10_000
}

/// A convergence-rate experiment. See the README for the JSON schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub target: TargetSpec,
    pub noise: NoiseModel,
    pub estimator: EstimatorSpec,
    pub hyper: HyperConfig,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if self.n_grid.is_empty() {
            return bad("n_grid is empty".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be strictly increasing".into());
        }
        if self.n_grid[0] < 3 {
            return bad("every n must be at least 3".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.n_mc < 2 {
            return bad("n_mc must be at least 2".into());
        }
        let e = &self.estimator;
        if e.depth < 2 || e.width == 0 || e.subnets == 0 {
            return bad("estimator needs depth >= 2, width >= 1, subnets >= 1".into());
        }
        if let Some(rate) = e.subnets_per_n {
            if !(rate >= 0.0 && rate.is_finite()) {
                return bad(format!("subnets_per_n must be nonnegative, got {rate}"));
            }
        }
        if e.kind == EstimatorKind::Interaction {
            match e.d_star {
                Some(k) if k >= 1 && k < self.d => {}
                other => return bad(format!("interaction needs 1 <= d_star < d, got {other:?}")),
            }
        }
        match self.hyper.l_n {
            LnRule::Fixed { value } if !(value > 0.0 && value.is_finite()) => {
                return bad(format!("fixed L_n must be positive, got {value}"));
            }
            LnRule::Auto { safety, .. } if !(safety >= 1.0) => {
                return bad(format!("L_n safety factor must be at least 1, got {safety}"));
            }
            _ => {}
        }
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.target()?;
        Ok(())
    }

    pub fn target(&self) -> Result<TargetFunction> {
        self.target.build(self.d).map_err(|e| Error::Config(format!("target: {e}")))
    }

    /// Input dimension of each network: `d*` for interaction, `d` otherwise.
    pub fn effective_dim(&self) -> usize {
        match self.estimator.kind {
            EstimatorKind::Plain => self.d,
            EstimatorKind::Interaction => self.estimator.d_star.unwrap_or(self.d),
        }
    }

    /// Constants for sample size `n`; `L_n` and `t_n` are placeholders
    /// until the schedule is resolved for a concrete dataset.
    pub fn hyper_params(&self, n: usize, m_sup: f64) -> HyperParams {
        let h = &self.hyper;
        let c5 = h.c5.unwrap_or_else(|| self.noise.moment_constant(m_sup));
        HyperParams {
            n,
            c1: h.c1,
            c2: h.c2,
            c3: h.c3,
            c4: h.c4,
            c5,
            c6: h.c6,
            tau: h.tau.unwrap_or(1.0 / (1.0 + self.effective_dim() as f64)),
            l_n: 1.0,
            t_n: 0,
            desk: DeskOverrides { k_max: Some(self.estimator.subnets_at(n)), l_n: None, t_n_max: h.t_n },
        }
    }
}
