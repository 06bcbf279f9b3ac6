use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AxisBox;
use crate::error::Result;
use crate::net::{eval_subnet, Topology, WeightVector};
use crate::rng::{derive_seed, CounterRng};

/// A hypothesis of the indicator construction that does not hold.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum HypothesisViolation {
    #[error("margin: side {side} of coordinate {coord} is below 2*delta = {required}")]
    Margin { coord: usize, side: f64, required: f64 },
    #[error("delta must lie in (0, 1], got {0}")]
    DeltaRange(f64),
    #[error("depth must be at least 2, got {0}")]
    Depth(usize),
    #[error("width {width} is below 2d = {required}")]
    Width { width: usize, required: usize },
    #[error("n >= 8d: n = {n}, 8d = {required}")]
    SampleSize8d { n: f64, required: f64 },
    #[error("n >= exp(r+1): n = {n}, exp(r+1) = {required}")]
    SampleSizeWidth { n: f64, required: f64 },
    #[error("n >= e^s: n = {n}, e^s = {required}")]
    SampleSizeExponent { n: f64, required: f64 },
}

/// Validated inputs of the box indicator network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorNetSpec {
    pub bx: AxisBox,
    pub delta: f64,
    /// Sample size `n`; only `ln n` enters the weights.
    pub n: f64,
    pub s: u32,
    pub depth: usize,
    pub width: usize,
}

/// Smallest integer `n` meeting the sample-size hypotheses for `(d, r, s)`.
pub fn indicator_sample_size(d: usize, width: usize, s: u32) -> f64 {
    (8.0 * d as f64).max(((width + 1) as f64).exp()).max((s as f64).exp()).ceil()
}

impl IndicatorNetSpec {
    pub fn new(
        bx: AxisBox,
        delta: f64,
        n: f64,
        s: u32,
        depth: usize,
        width: usize,
    ) -> Result<Self, HypothesisViolation> {
        let d = bx.d();
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(HypothesisViolation::DeltaRange(delta));
        }
        for (coord, (a, b)) in bx.u().iter().zip(bx.v()).enumerate() {
            if b - a < 2.0 * delta {
                return Err(HypothesisViolation::Margin { coord: coord + 1, side: b - a, required: 2.0 * delta });
            }
        }
        if depth < 2 {
            return Err(HypothesisViolation::Depth(depth));
        }
        if width < 2 * d {
            return Err(HypothesisViolation::Width { width, required: 2 * d });
        }
        check_sample_size(d, width, s, n)?;
        Ok(Self { bx, delta, n, s, depth, width })
    }

    pub fn d(&self) -> usize {
        self.bx.d()
    }

    pub fn ln_n(&self) -> f64 {
        self.n.ln()
    }

    pub fn topology(&self) -> Topology {
        Topology::new(self.d(), self.depth, self.width, 1).expect("validated shape")
    }

    /// `n^{-s}`, the accuracy promised on both sides.
    pub fn accuracy(&self) -> f64 {
        (-(self.s as f64) * self.ln_n()).exp()
    }
}

pub(crate) fn check_sample_size(d: usize, width: usize, s: u32, n: f64) -> Result<(), HypothesisViolation> {
    let eight_d = 8.0 * d as f64;
    if n < eight_d {
        return Err(HypothesisViolation::SampleSize8d { n, required: eight_d });
    }
    let ew = ((width + 1) as f64).exp();
    if n < ew {
        return Err(HypothesisViolation::SampleSizeWidth { n, required: ew });
    }
    let es = (s as f64).exp();
    if n < es {
        return Err(HypothesisViolation::SampleSizeExponent { n, required: es });
    }
    Ok(())
}

/// Writes the indicator weights for `bx` into one subnetwork block.
///
/// Level 0: unit `j` computes `sigma(a (x_j - u_j))`, unit `j + d` computes
/// `sigma(a (v_j - x_j))`, `a = 4d (ln n)^2 / delta`. Level 1, unit 1:
/// weight `8 (ln n)^2` on units `1..=2d`, bias `-8 (ln n)^2 (2d - 1/2)`.
/// Levels `2..L`, unit 1: weight `6 (ln n)^2` on unit 1, bias `-3 (ln n)^2`.
/// Every other entry is zero. No hypothesis is checked here.
pub(crate) fn write_indicator_block(topo: &Topology, block: &mut [f64], bx: &AxisBox, delta: f64, ln_n: f64) {
    let d = topo.d;
    debug_assert_eq!(bx.d(), d);
    debug_assert!(topo.width >= 2 * d);
    block.iter_mut().for_each(|w| *w = 0.0);
    let l2 = ln_n * ln_n;
    let slope = 4.0 * d as f64 * l2 / delta;
    for j in 0..d {
        let up = j * (d + 1);
        block[up] = -slope * bx.u()[j];
        block[up + 1 + j] = slope;
        let down = (j + d) * (d + 1);
        block[down] = slope * bx.v()[j];
        block[down + 1 + j] = -slope;
    }
    let base = topo.level_offset(1);
    block[base] = -8.0 * l2 * (2.0 * d as f64 - 0.5);
    for t in 1..=2 * d {
        block[base + t] = 8.0 * l2;
    }
    for l in 2..topo.depth {
        let base = topo.level_offset(l);
        block[base] = -3.0 * l2;
        block[base + 1] = 6.0 * l2;
    }
}

/// Single-subnetwork indicator of `spec.bx` with outer weight 1.
pub fn build_indicator(spec: &IndicatorNetSpec) -> WeightVector {
    let topo = spec.topology();
    let mut w = WeightVector::zeros(topo);
    write_indicator_block(&topo, w.subnet_mut(0), &spec.bx, spec.delta, spec.ln_n());
    w.outer_mut()[0] = 1.0;
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Each inner weight moves by at most this much; must not exceed `ln n`.
    pub perturbation: f64,
    /// Weight vectors tried; trial 0 is unperturbed.
    pub trials: usize,
    /// Points per region.
    pub points: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { perturbation: 0.0, trials: 1, points: 10_000, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub evaluations: usize,
    pub violations: usize,
    pub min: f64,
    pub max: f64,
}

impl RegionStats {
    fn empty() -> Self {
        Self { evaluations: 0, violations: 0, min: f64::INFINITY, max: f64::NEG_INFINITY }
    }

    fn record(&mut self, value: f64, ok: bool) {
        self.evaluations += 1;
        self.violations += usize::from(!ok);
        self.min = self.min.min(value);
        self.max = self.max.max(value);
    }

    fn merge(mut self, other: Self) -> Self {
        self.evaluations += other.evaluations;
        self.violations += other.violations;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub d: usize,
    pub delta: f64,
    pub n: f64,
    pub ln_n: f64,
    pub s: u32,
    pub depth: usize,
    pub width: usize,
    /// Values inside must be at least `1 - n^{-s}`, outside at most `n^{-s}`.
    pub accuracy: f64,
    pub perturbation: f64,
    pub trials: usize,
    pub inner: RegionStats,
    pub outer: RegionStats,
    /// Between the two regions; recorded, not asserted.
    pub shell: RegionStats,
    pub passed: bool,
}

/// Evaluates `net` (and perturbed copies of its inner weights) on random
/// points of the inner box `[u + delta, v - delta]`, of the outer region
/// where some coordinate leaves `[u - delta, v + delta]`, and of the shell
/// in between. Outer and shell points stay in `[-ln n, ln n]^d`.
pub fn verify_indicator(net: &WeightVector, spec: &IndicatorNetSpec, opts: &VerifyOptions) -> IndicatorReport {
    let d = spec.d();
    let topo = *net.topology();
    let alpha = spec.ln_n();
    let eps = spec.accuracy();
    let bx = &spec.bx;
    let delta = spec.delta;

    let mut rng = CounterRng::new(derive_seed(opts.seed, &[1]));
    let inner_pts: Vec<f64> = (0..opts.points)
        .flat_map(|_| (0..d).map(|j| rng.uniform(bx.u()[j] + delta, bx.v()[j] - delta)).collect::<Vec<_>>())
        .collect();
    let outer_pts = sample_outer(bx, delta, alpha, opts.points, &mut rng);
    let shell_pts = sample_shell(bx, delta, alpha, opts.points, &mut rng);

    let trials = opts.trials.max(1);
    let (inner, outer, shell) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut w = net.clone();
            if t > 0 && opts.perturbation > 0.0 {
                perturb(w.inner_mut(), opts.perturbation, t, derive_seed(opts.seed, &[2, t as u64]));
            }
            let a = w.outer()[0];
            let block = w.subnet(0);
            let mut act = vec![0.0; topo.activations_per_subnet()];
            let mut eval = |x: &[f64]| a * eval_subnet(&topo, block, x, &mut act);
            let mut inner = RegionStats::empty();
            let mut outer = RegionStats::empty();
            let mut shell = RegionStats::empty();
            for x in inner_pts.chunks(d) {
                let v = eval(x);
                inner.record(v, v >= 1.0 - eps);
            }
            for x in outer_pts.chunks(d) {
                let v = eval(x);
                outer.record(v, v <= eps);
            }
            for x in shell_pts.chunks(d) {
                shell.record(eval(x), true);
            }
            (inner, outer, shell)
        })
        .reduce(
            || (RegionStats::empty(), RegionStats::empty(), RegionStats::empty()),
            |a, b| (a.0.merge(b.0), a.1.merge(b.1), a.2.merge(b.2)),
        );

    IndicatorReport {
        d,
        delta,
        n: spec.n,
        ln_n: alpha,
        s: spec.s,
        depth: topo.depth,
        width: topo.width,
        accuracy: eps,
        perturbation: opts.perturbation,
        trials,
        passed: inner.violations == 0 && outer.violations == 0,
        inner,
        outer,
        shell,
    }
}

/// Odd trials move every weight by exactly `±magnitude`, even trials by a
/// uniform amount in `[-magnitude, magnitude]`.
fn perturb(inner: &mut [f64], magnitude: f64, trial: usize, seed: u64) {
    let mut rng = CounterRng::new(seed);
    for w in inner {
        *w += if trial % 2 == 1 { magnitude * rng.sign() } else { rng.uniform(-magnitude, magnitude) };
    }
}

/// One coordinate within distance 1 beyond `[u - delta, v + delta]`, the
/// rest within one unit of the box; everything clipped to `[-alpha, alpha]`.
fn sample_outer(bx: &AxisBox, delta: f64, alpha: f64, count: usize, rng: &mut CounterRng) -> Vec<f64> {
    let d = bx.d();
    let mut pts = Vec::with_capacity(count * d);
    while pts.len() < count * d {
        let exit = (rng.unit() * d as f64) as usize % d;
        let start = pts.len();
        for j in 0..d {
            let (u, v) = (bx.u()[j], bx.v()[j]);
            let x = if j == exit {
                let below = (u - delta - 1.0).max(-alpha)..(u - delta);
                let above = (v + delta)..(v + delta + 1.0).min(alpha);
                let lens = ((below.end - below.start).max(0.0), (above.end - above.start).max(0.0));
                let t = rng.unit() * (lens.0 + lens.1);
                let x = if t < lens.0 { below.start + t } else { above.start + (t - lens.0) };
                // keep strictly outside the closed frame
                if x >= u - delta && x <= v + delta {
                    f64::NAN
                } else {
                    x
                }
            } else {
                rng.uniform((u - delta - 1.0).max(-alpha), (v + delta + 1.0).min(alpha))
            };
            pts.push(x);
        }
        if pts[start..].iter().any(|x| x.is_nan()) {
            pts.truncate(start);
        }
    }
    pts
}

/// Uniform points of `[u - delta, v + delta]` outside `[u + delta, v - delta]`.
fn sample_shell(bx: &AxisBox, delta: f64, alpha: f64, count: usize, rng: &mut CounterRng) -> Vec<f64> {
    let d = bx.d();
    let inner = bx.shrink(delta);
    let mut pts = Vec::with_capacity(count * d);
    let mut x = vec![0.0; d];
    let mut attempts = 0usize;
    while pts.len() < count * d && attempts < 1000 * count.max(1) {
        attempts += 1;
        for j in 0..d {
            x[j] = rng.uniform((bx.u()[j] - delta).max(-alpha), (bx.v()[j] + delta).min(alpha));
        }
        if inner.as_ref().is_some_and(|b| b.contains(&x)) {
            continue;
        }
        pts.extend_from_slice(&x);
    }
    pts
}
