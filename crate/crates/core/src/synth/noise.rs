use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    None,
    Gaussian,
    /// Uniform on `[-scale, scale]`.
    BoundedUniform,
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => Self::None,
            "gaussian" => Self::Gaussian,
            "bounded-uniform" => Self::BoundedUniform,
            other => return Err(Error::InvalidArgument(format!("unknown noise kind `{other}`"))),
        })
    }
}

/// Additive centered noise `Y - m(X)`, independent of `X`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Standard deviation for Gaussian noise, half-width for uniform noise.
    #[serde(default)]
    pub scale: f64,
}

impl NoiseModel {
    pub const NONE: Self = Self { kind: NoiseKind::None, scale: 0.0 };

    pub fn gaussian(sd: f64) -> Self {
        Self { kind: NoiseKind::Gaussian, scale: sd }
    }

    pub fn bounded_uniform(half_width: f64) -> Self {
        Self { kind: NoiseKind::BoundedUniform, scale: half_width }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise scale must be nonnegative, got {}", self.scale)));
        }
        Ok(())
    }

    pub fn draw(&self, rng: &mut CounterRng) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng.raw());
                self.scale * z
            }
            NoiseKind::BoundedUniform => rng.uniform(-self.scale, self.scale),
        }
    }

    pub fn variance(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian => self.scale * self.scale,
            NoiseKind::BoundedUniform => self.scale * self.scale / 3.0,
        }
    }

    /// A value of `c5` for which `E exp(c5 Y^2)` is finite, given a bound on
    /// `sup |m|`. Uses `c5 = 1 / (8 (sup^2 + 4 var + 1))`; for Gaussian
    /// noise this stays below the `1 / (4 sd^2)` integrability threshold.
    pub fn moment_constant(&self, m_sup: f64) -> f64 {
        1.0 / (8.0 * (m_sup * m_sup + 4.0 * self.variance() + 1.0))
    }
}
