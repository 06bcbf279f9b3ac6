use rayon::prelude::*;
use serde::Serialize;

use crate::approx::{
    approx_error, build_covering, build_indicator, build_multiscale_net, indicator_sample_size, init_range_compatible,
    uniform_sample, verify_indicator, AxisBox, IndicatorNetSpec, IndicatorReport, MultiscaleSpec, TelescopingReport,
    VerifyOptions,
};
use crate::error::Result;
use crate::net::{init_weights, HyperParams, Topology, WeightVector};
use crate::optim::{
    check_descent, check_pl, empirical_risk, estimate_curvature, risk_and_gradient, train, Dataset, DescentReport,
};
use crate::rng::{derive_seed, CounterRng};
use crate::synth::{make_target, sample_dataset, L2Estimate, NoiseModel, TargetKind, TargetParams};

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Central difference step of the gradient check.
const FD_STEP: f64 = 1e-5;
/// Denominator floor of the gradient check's relative error.
const FD_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug, Serialize)]
pub struct GradCheckReport {
    pub instances: usize,
    pub components: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// Shape `(d, L, r, K)` of the worst instance.
    pub worst_shape: (usize, usize, usize, usize),
}

/// `(d, L, r, K)`.
type Shape = (usize, usize, usize, usize);

/// A random network and dataset for property checks. Instance `i` cycles
/// through `d in {1,2,3}`, `L in {2,3}`, `K in {1,5,50}`. Outer weights are
/// scaled by `1/sqrt(K)` so the output stays of order one.
fn random_instance(i: usize, seed: u64, inner: f64, outer: f64) -> (WeightVector, Dataset, f64) {
    let mut rng = CounterRng::new(derive_seed(seed, &[i as u64]));
    let d = 1 + i % 3;
    let depth = 2 + (i / 3) % 2;
    let k = [1, 5, 50][(i / 6) % 3];
    let width = 1 + (rng.unit() * 3.0) as usize;
    let topo = Topology::new(d, depth, width, k).expect("valid shape");
    let mut w = WeightVector::zeros(topo);
    w.inner_mut().iter_mut().for_each(|v| *v = rng.uniform(-inner, inner));
    let outer = outer / (k as f64).sqrt();
    w.outer_mut().iter_mut().for_each(|v| *v = rng.uniform(-outer, outer));
    let n = 2 + (rng.unit() * 10.0) as usize;
    let xs = (0..n * d).map(|_| rng.unit()).collect();
    let ys = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let c3 = rng.uniform(0.0, 0.5);
    (w, Dataset::new(d, xs, ys).expect("finite data"), c3)
}

/// Compares the analytic gradient with central finite differences on
/// `instances` random problems.
pub fn gradcheck(instances: usize, seed: u64) -> Result<GradCheckReport> {
    let per: Vec<(f64, f64, usize, Shape)> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let (w, data, c3) = random_instance(i, seed, 2.0, 1.0);
            let (_, grad) = risk_and_gradient(&w, &data, c3)?;
            let mut probe = w.clone();
            let mut worst_rel: f64 = 0.0;
            let mut worst_abs: f64 = 0.0;
            for o in 0..w.len() {
                let base = w.as_slice()[o];
                probe.as_mut_slice()[o] = base + FD_STEP;
                let up = empirical_risk(&probe, &data, c3)?;
                probe.as_mut_slice()[o] = base - FD_STEP;
                let down = empirical_risk(&probe, &data, c3)?;
                probe.as_mut_slice()[o] = base;
                let fd = (up - down) / (2.0 * FD_STEP);
                worst_rel = worst_rel.max(relative_error(grad[o], fd, FD_FLOOR));
                worst_abs = worst_abs.max((grad[o] - fd).abs());
            }
            let t = w.topology();
            Ok((worst_rel, worst_abs, w.len(), (t.d, t.depth, t.width, t.subnets)))
        })
        .collect::<Result<_>>()?;
    let mut report =
        GradCheckReport { instances, components: 0, max_rel_error: 0.0, max_abs_error: 0.0, worst_shape: (0, 0, 0, 0) };
    for (rel, abs, count, shape) in per {
        report.components += count;
        report.max_abs_error = report.max_abs_error.max(abs);
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_shape = shape;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct PlSuiteReport {
    pub instances: usize,
    pub failures: usize,
    pub min_slack: f64,
}

/// Checks the PL inequality of the outer-weight subproblem on random
/// networks, data and penalties `c3` in `[0.01, 1)`.
pub fn verify_pl(instances: usize, seed: u64) -> Result<PlSuiteReport> {
    let per: Vec<f64> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let (w, data, _) = random_instance(i, seed, 3.0, 2.0);
            let mut rng = CounterRng::new(derive_seed(seed, &[u64::MAX, i as u64]));
            let c3 = rng.uniform(0.01, 1.0);
            let check = check_pl(&w, &data, c3)?;
            Ok(check.slack())
        })
        .collect::<Result<_>>()?;
    Ok(PlSuiteReport {
        instances,
        failures: per.iter().filter(|&&s| s < -1e-9).count(),
        min_slack: per.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentSuiteReport {
    pub runs: usize,
    pub steps: usize,
    pub descent_violations: usize,
    pub drift_violations: usize,
    /// `L_est` of each run; the step size is exactly `1 / L_est`.
    pub l_est: Vec<f64>,
    pub reports: Vec<DescentReport>,
}

/// Seeded small training runs with step size `1 / L_est`, where `L_est` is
/// `safety` times a power-iteration curvature estimate at the start.
pub fn verify_descent(runs: usize, steps: u64, safety: f64, seed: u64) -> Result<DescentSuiteReport> {
    let per: Vec<(f64, DescentReport)> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, &[i as u64]);
            let d = 1 + i % 2;
            let n = 60;
            let m = make_target(TargetKind::LipschitzCone, 1.0, 1.0, d, &TargetParams::default())?;
            let data = sample_dataset(&m, &NoiseModel::gaussian(0.1), n, derive_seed(s, &[1]))?;
            let mut hp = HyperParams::suggested(n, d, 1.0);
            hp.c1 = 0.1;
            hp.c2 = 0.1;
            hp.c3 = 0.1;
            let topo = Topology::new(d, 2, 3, 10)?;
            let w0 = init_weights(topo, &hp, derive_seed(s, &[2]));
            let l_est = safety * estimate_curvature(&w0, &data, hp.c3, 30, derive_seed(s, &[3]))?;
            hp.l_n = l_est;
            hp.t_n = steps;
            let trace = train(&w0, &data, &hp)?;
            Ok((l_est, check_descent(&trace, l_est)))
        })
        .collect::<Result<_>>()?;
    let mut out = DescentSuiteReport {
        runs,
        steps: 0,
        descent_violations: 0,
        drift_violations: 0,
        l_est: vec![],
        reports: vec![],
    };
    for (l, r) in per {
        out.steps += r.steps.len();
        out.descent_violations += r.steps.iter().filter(|s| !s.descent_holds).count();
        out.drift_violations += r.steps.iter().filter(|s| !s.drift_holds).count();
        out.l_est.push(l);
        out.reports.push(r);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma5Options {
    pub d: usize,
    pub delta: f64,
    pub s: u32,
    pub depth: usize,
    /// Defaults to `2d`.
    pub width: Option<usize>,
    /// Defaults to the smallest admissible `n`.
    pub n: Option<f64>,
    /// Defaults to `ln n`.
    pub perturbation: Option<f64>,
    pub trials: usize,
    pub points: usize,
    pub seed: u64,
}

impl Lemma5Options {
    pub fn new(d: usize, delta: f64, s: u32) -> Self {
        Self { d, delta, s, depth: 2, width: None, n: None, perturbation: None, trials: 100, points: 10_000, seed: 0 }
    }
}

/// Indicator of the box centered at `(1/2, ..., 1/2)` with half-width
/// `max(1/4, delta)`, checked on random points and perturbed weights.
pub fn verify_lemma5(opts: &Lemma5Options) -> Result<IndicatorReport> {
    let width = opts.width.unwrap_or(2 * opts.d);
    let n = opts.n.unwrap_or_else(|| indicator_sample_size(opts.d, width, opts.s));
    let half = opts.delta.max(0.25);
    let bx = AxisBox::cube(opts.d, 0.5 - half, 0.5 + half)?;
    let spec = IndicatorNetSpec::new(bx, opts.delta, n, opts.s, opts.depth, width)?;
    let net = build_indicator(&spec);
    let vopts = VerifyOptions {
        perturbation: opts.perturbation.unwrap_or_else(|| spec.ln_n()).min(spec.ln_n()),
        trials: opts.trials,
        points: opts.points,
        seed: opts.seed,
    };
    Ok(verify_indicator(&net, &spec, &vopts))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma8Options {
    pub d: usize,
    pub l: usize,
    /// Defaults to `2^-l / 8`.
    pub delta: Option<f64>,
    pub n: f64,
    pub s: u32,
    pub sample: usize,
    pub points: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BorderLevel {
    pub k: usize,
    pub per_coordinate: Vec<f64>,
    pub union: f64,
    /// `4 d 2^k delta`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma8Report {
    pub d: usize,
    pub l: usize,
    pub delta: f64,
    pub n: f64,
    pub s: u32,
    pub term_count: usize,
    pub term_bound: f64,
    pub border: Vec<BorderLevel>,
    pub telescoping: TelescopingReport,
    pub sup_observed: f64,
    pub sup_bound: f64,
    pub replicated_sum_of_squares: f64,
    /// `c / 2^{2dl}` with the constructed `c`.
    pub sum_of_squares_bound: f64,
    pub l2: L2Estimate,
    /// Whether `8d / delta <= c2 n^tau` with `c2 = 1`, `tau = 1/(1+d)`;
    /// reported, not asserted.
    pub init_range_compatible: bool,
    pub passed: bool,
}

/// Multiscale network of the unit Lipschitz cone on `[0,1]^d`.
pub fn verify_lemma8(opts: &Lemma8Options) -> Result<Lemma8Report> {
    let d = opts.d;
    let delta = opts.delta.unwrap_or(1.0 / (8.0 * (1u64 << opts.l) as f64));
    let f = make_target(TargetKind::LipschitzCone, 1.0, 1.0, d, &TargetParams::default())?;
    let sample = uniform_sample(d, opts.sample, derive_seed(opts.seed, &[1]));
    let cov = build_covering(opts.l, delta, d, &sample)?;
    let spec = MultiscaleSpec { depth: 2, width: 2 * d, n: opts.n, s: opts.s, replicate: true };
    let net = build_multiscale_net(&f, &cov, spec)?;
    let points = uniform_sample(d, opts.points, derive_seed(opts.seed, &[2]));
    let telescoping = net.check_telescoping(&f, &points);
    let sup_observed = points
        .par_chunks(d)
        .map(|x| net.eval(x).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let border: Vec<BorderLevel> = cov.levels[1..]
        .iter()
        .map(|lv| BorderLevel {
            k: lv.k,
            per_coordinate: lv.border_mass.clone(),
            union: lv.union_border_mass,
            bound: 4.0 * d as f64 * (1u64 << lv.k) as f64 * delta,
        })
        .collect();
    let sos = net.outer_sum_of_squares();
    let sos_bound = net.sum_of_squares_constant() / 2f64.powi((2 * d * opts.l) as i32);
    let l2 = approx_error(&net, &f, opts.points, derive_seed(opts.seed, &[3]));
    let per_coordinate_ok = border.iter().all(|b| b.per_coordinate.iter().all(|&m| m <= b.bound / d as f64));
    let passed = telescoping.missing == 0
        && telescoping.max_abs_error <= 1e-12
        && net.term_count() as f64 <= net.term_bound()
        && sup_observed <= net.sup_bound()
        && per_coordinate_ok
        && border.iter().all(|b| b.union <= b.bound)
        && sos <= sos_bound;
    Ok(Lemma8Report {
        d,
        l: opts.l,
        delta,
        n: opts.n,
        s: opts.s,
        term_count: net.term_count(),
        term_bound: net.term_bound(),
        border,
        telescoping,
        sup_observed,
        sup_bound: net.sup_bound(),
        replicated_sum_of_squares: sos,
        sum_of_squares_bound: sos_bound,
        l2,
        init_range_compatible: init_range_compatible(d, delta, 1.0, opts.n, 1.0 / (1.0 + d as f64)),
        passed,
    })
}
