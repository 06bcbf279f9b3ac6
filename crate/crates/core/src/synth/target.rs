use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::enumerate_subsets;
use crate::rng::CounterRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    Constant,
    Linear,
    LipschitzCone,
    HoelderBump,
    AdditiveInteraction,
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "constant" => Self::Constant,
            "linear" => Self::Linear,
            "lipschitz-cone" => Self::LipschitzCone,
            "hoelder-bump" => Self::HoelderBump,
            "additive-interaction" => Self::AdditiveInteraction,
            other => return Err(Error::UnknownKind(other.to_string())),
        })
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Constant => "constant",
            Self::Linear => "linear",
            Self::LipschitzCone => "lipschitz-cone",
            Self::HoelderBump => "hoelder-bump",
            Self::AdditiveInteraction => "additive-interaction",
        };
        f.write_str(s)
    }
}

/// Kind-specific knobs; anything left unset takes a default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetParams {
    /// Constant value (`constant`).
    pub value: Option<f64>,
    /// Apex or bump center, defaults to the cube center.
    pub center: Option<Vec<f64>>,
    /// Bump support radius, default 0.5.
    pub radius: Option<f64>,
    /// Direction of a `linear` target; rescaled to the declared constant.
    pub coeffs: Option<Vec<f64>>,
    pub intercept: Option<f64>,
    /// Interaction order of `additive-interaction`, default 1.
    pub d_star: Option<usize>,
    /// Base frequency of the sine components, default 1.
    pub frequency: Option<f64>,
}

/// Serializable description of a target, as used in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub kind: String,
    pub p: f64,
    pub c: f64,
    #[serde(default)]
    pub params: TargetParams,
}

impl TargetSpec {
    pub fn build(&self, d: usize) -> Result<TargetFunction> {
        make_target(self.kind.parse()?, self.p, self.c, d, &self.params)
    }
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A regression function `m` on `[0,1]^d` declared `(p, C)`-smooth:
/// `|m(x) - m(z)| <= C |x - z|^p`.
#[derive(Clone)]
pub struct TargetFunction {
    kind: TargetKind,
    p: f64,
    c: f64,
    d: usize,
    sup: f64,
    eval: Evaluator,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("kind", &self.kind)
            .field("p", &self.p)
            .field("c", &self.c)
            .field("d", &self.d)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderCheck {
    pub pairs: usize,
    pub violations: usize,
    /// Largest observed `|m(x) - m(z)| / (C |x - z|^p)`.
    pub worst_ratio: f64,
}

impl TargetFunction {
    /// Wraps an arbitrary evaluator; the declared smoothness is not checked.
    pub fn custom(d: usize, p: f64, c: f64, sup: f64, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { kind: TargetKind::Constant, p, c, d, sup, eval: Arc::new(f) }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Upper bound on `sup |m|` over the unit cube.
    pub fn sup_bound(&self) -> f64 {
        self.sup
    }

    /// Whether `p` lies in the smoothness range `[1/2, 1]` the rate results cover.
    pub fn in_theorem_regime(&self) -> bool {
        (0.5..=1.0).contains(&self.p)
    }

    /// Tests the Hölder bound on `pairs` random pairs from the unit cube;
    /// half the pairs are at distance below 1e-3 to probe local behaviour.
    pub fn holder_spot_check(&self, pairs: usize, seed: u64) -> HolderCheck {
        let mut rng = CounterRng::new(seed);
        let mut violations = 0;
        let mut worst: f64 = 0.0;
        let mut x = vec![0.0; self.d];
        let mut z = vec![0.0; self.d];
        for t in 0..pairs {
            x.iter_mut().for_each(|v| *v = rng.unit());
            if t % 2 == 0 {
                z.iter_mut().for_each(|v| *v = rng.unit());
            } else {
                for (zi, xi) in z.iter_mut().zip(&x) {
                    *zi = (xi + rng.uniform(-1e-3, 1e-3)).clamp(0.0, 1.0);
                }
            }
            let dist = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let diff = (self.eval(&x) - self.eval(&z)).abs();
            let allowed = self.c * dist.powf(self.p);
            if allowed > 0.0 {
                worst = worst.max(diff / allowed);
            }
            if diff > allowed * (1.0 + 1e-12) + 1e-14 {
                violations += 1;
            }
        }
        HolderCheck { pairs, violations, worst_ratio: worst }
    }
}

/// Number of pairs used to verify each constructed target.
const SPOT_CHECK_PAIRS: usize = 10_000;

/// Builds a target of the given kind that is `(p, C)`-smooth on `[0,1]^d`
/// for `0 < p <= 1`, and verifies the declared constant on random pairs.
///
/// Kinds:
/// * `constant`: `m == value`.
/// * `linear`: `intercept + <a, x>` with `|a| = C d^{-(1-p)/2}`.
/// * `lipschitz-cone`: `C |x - x0|^p`.
/// * `hoelder-bump`: `C max(0, rho - |x - x0|)^p`.
/// * `additive-interaction`: `sum over |I| = d*` of
///   `a sin(pi w_I s_I(x) + phi_I)`, `s_I(x) = sum_{j in I} x_j / sqrt(d*)`,
///   amplitudes scaled so the component Lipschitz constants sum to
///   `C d^{-(1-p)/2}`.
pub fn make_target(kind: TargetKind, p: f64, c: f64, d: usize, params: &TargetParams) -> Result<TargetFunction> {
    if d == 0 {
        return Err(Error::InvalidArgument("target dimension must be at least 1".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent must lie in (0, 1], got {p}")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("Hölder constant must be nonnegative, got {c}")));
    }
    // Lipschitz constant that makes a Lipschitz function (p, C)-smooth on a set of diameter sqrt(d)
    let lip = c * (d as f64).powf(-(1.0 - p) / 2.0);
    let center = match &params.center {
        Some(c0) if c0.len() != d => return Err(Error::DimensionMismatch { expected: d, got: c0.len() }),
        Some(c0) => c0.clone(),
        None => vec![0.5; d],
    };
    let dist = move |x: &[f64], c0: &[f64]| x.iter().zip(c0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();

    let (eval, sup): (Evaluator, f64) = match kind {
        TargetKind::Constant => {
            let v = params.value.unwrap_or(0.0);
            (Arc::new(move |_| v), v.abs())
        }
        TargetKind::Linear => {
            let raw = params.coeffs.clone().unwrap_or_else(|| vec![1.0; d]);
            if raw.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: raw.len() });
            }
            let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
            let coeffs: Vec<f64> = if norm > 0.0 { raw.iter().map(|a| a * lip / norm).collect() } else { raw };
            let b = params.intercept.unwrap_or(0.0);
            let sup = b.abs() + coeffs.iter().map(|a| a.abs()).sum::<f64>();
            (Arc::new(move |x: &[f64]| b + coeffs.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>()), sup)
        }
        TargetKind::LipschitzCone => {
            let c0 = center.clone();
            let far = (0..d).map(|j| c0[j].abs().max((1.0 - c0[j]).abs()).powi(2)).sum::<f64>().sqrt();
            (Arc::new(move |x: &[f64]| c * dist(x, &c0).powf(p)), c * far.powf(p))
        }
        TargetKind::HoelderBump => {
            let c0 = center.clone();
            let rho = params.radius.unwrap_or(0.5);
            if !(rho > 0.0) {
                return Err(Error::InvalidArgument(format!("bump radius must be positive, got {rho}")));
            }
            (Arc::new(move |x: &[f64]| c * (rho - dist(x, &c0)).max(0.0).powf(p)), c * rho.powf(p))
        }
        TargetKind::AdditiveInteraction => {
            let d_star = params.d_star.unwrap_or(1);
            let subsets: Vec<Vec<usize>> =
                if d_star == d { vec![(1..=d).collect()] } else { enumerate_subsets(d, d_star)? };
            let base = params.frequency.unwrap_or(1.0);
            let freqs: Vec<f64> = (0..subsets.len()).map(|g| base * (1.0 + 0.5 * (g % 3) as f64)).collect();
            let total: f64 = freqs.iter().map(|w| std::f64::consts::PI * w).sum();
            let amp = if total > 0.0 { lip / total } else { 0.0 };
            let scale = 1.0 / (d_star as f64).sqrt();
            let sup = amp * subsets.len() as f64;
            (
                Arc::new(move |x: &[f64]| {
                    subsets
                        .iter()
                        .zip(&freqs)
                        .enumerate()
                        .map(|(g, (set, w))| {
                            let s: f64 = set.iter().map(|&j| x[j - 1]).sum::<f64>() * scale;
                            amp * (std::f64::consts::PI * w * s + 0.7 * g as f64).sin()
                        })
                        .sum()
                }),
                sup,
            )
        }
    };

    let target = TargetFunction { kind, p, c, d, sup, eval };
    let check = target.holder_spot_check(SPOT_CHECK_PAIRS, 0x4f1d);
    if check.violations > 0 {
        return Err(Error::HolderViolation { violations: check.violations, worst_ratio: check.worst_ratio });
    }
    Ok(target)
}
