use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Caps applied in desk mode, where the theorem schedules are infeasible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DeskOverrides {
    /// Upper bound on the number of parallel subnetworks.
    pub k_max: Option<usize>,
    /// Inverse step size to use instead of the theorem's lower bound.
    pub l_n: Option<f64>,
    /// Upper bound on the number of gradient steps.
    pub t_n_max: Option<u64>,
}

/// Constants and schedule of the estimator.
///
/// `beta_n = c4 ln n` and `lambda_n = 1 / l_n` are derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub n: usize,
    /// Half-width factor of the uniform init of levels `1..L`.
    pub c1: f64,
    /// Half-width factor of the uniform init of level `0`.
    pub c2: f64,
    /// Ridge penalty on the outer weights.
    pub c3: f64,
    /// Truncation factor.
    pub c4: f64,
    /// Exponential moment constant of the response.
    pub c5: f64,
    /// Step count factor, `t_n = ceil(c6 L_n ln n)`.
    pub c6: f64,
    pub tau: f64,
    pub l_n: f64,
    pub t_n: u64,
    #[serde(default)]
    pub desk: DeskOverrides,
}

/// One inequality of the step-count / truncation / penalty compatibility
/// conditions, evaluated on concrete constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl HyperParams {
    /// Constants following the suggested choice `c4 = 1/c5`, `c6 = c5/4`,
    /// `c3 = 1/(8 c5)`, with `c1 = c2 = 1`, `tau = 1/(1+d)`. The schedule is
    /// left at `L_n = 1`, `t_n = 0` and must be resolved before training.
    ///
    /// These constants do not satisfy `2 c3 c6 >= 1`; see [`Self::conditions`].
    pub fn suggested(n: usize, d: usize, c5: f64) -> Self {
        Self {
            n,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0 / (8.0 * c5),
            c4: 1.0 / c5,
            c5,
            c6: c5 / 4.0,
            tau: 1.0 / (1.0 + d as f64),
            l_n: 1.0,
            t_n: 0,
            desk: DeskOverrides::default(),
        }
    }

    pub fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// Truncation level `beta_n = c4 ln n`.
    pub fn beta(&self) -> f64 {
        self.c4 * self.ln_n()
    }

    /// Step size `lambda_n = 1 / L_n`.
    pub fn step_size(&self) -> f64 {
        1.0 / self.l_n
    }

    /// Half-width of the uniform init at level 0.
    pub fn input_init_bound(&self) -> f64 {
        self.c2 * self.ln_n().powi(2) * (self.n as f64).powf(self.tau)
    }

    /// Half-width of the uniform init at levels `1..L`.
    pub fn hidden_init_bound(&self) -> f64 {
        self.c1 * self.ln_n().powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidHyperParams(format!("n must be at least 2, got {}", self.n)));
        }
        let named =
            [("c1", self.c1), ("c2", self.c2), ("c4", self.c4), ("c5", self.c5), ("c6", self.c6), ("tau", self.tau)];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidHyperParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.c3.is_finite() && self.c3 >= 0.0) {
            return Err(Error::InvalidHyperParams(format!("c3 must be nonnegative, got {}", self.c3)));
        }
        if !(self.l_n > 0.0) {
            return Err(Error::InvalidHyperParams(format!("L_n must be positive, got {}", self.l_n)));
        }
        Ok(())
    }

    /// The three compatibility conditions `2 c3 c6 >= 1`, `c4 c5 >= 1` and
    /// `4 c4 c6 <= 1`, each evaluated literally.
    pub fn conditions(&self) -> Vec<ConditionCheck> {
        let penalty = 2.0 * self.c3 * self.c6;
        let moment = self.c4 * self.c5;
        let trunc = 4.0 * self.c4 * self.c6;
        vec![
            ConditionCheck { name: "2*c3*c6 >= 1", lhs: penalty, rhs: 1.0, holds: penalty >= 1.0 },
            ConditionCheck { name: "c4*c5 >= 1", lhs: moment, rhs: 1.0, holds: moment >= 1.0 },
            ConditionCheck { name: "4*c4*c6 <= 1", lhs: trunc, rhs: 1.0, holds: trunc <= 1.0 },
        ]
    }

    pub fn conditions_hold(&self) -> bool {
        self.conditions().iter().all(|c| c.holds)
    }
}
