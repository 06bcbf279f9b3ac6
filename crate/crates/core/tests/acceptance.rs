//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs under `cargo test`; select with `--test acceptance`.
//! Criteria are chosen with `ACCEPTANCE_ONLY=1,5,10`.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use overparam::approx::{build_covering, uniform_sample};
use overparam::harness::{
    build_cell, gradcheck, run_experiment, verify_descent, verify_lemma5, verify_lemma8, verify_pl, CellModel,
    EstimatorKind, EstimatorSpec, ExperimentConfig, HyperConfig, Lemma5Options, Lemma8Options, LnRule, RateReport,
};
use overparam::optim::{check_descent, train};
use overparam::rng::derive_seed;
use overparam::synth::{NoiseModel, TargetParams, TargetSpec};

// Tolerances and limits fixed by the acceptance criteria.
const GRAD_REL_TOL: f64 = 1e-6;
const GRAD_INSTANCES: usize = 200;
const PL_INSTANCES: usize = 10_000;
const PL_SLACK: f64 = -1e-9;
const DESCENT_RUNS: usize = 20;
const INDICATOR_POINTS: usize = 10_000;
const INDICATOR_TRIALS: usize = 100;
const TELESCOPING_TOL: f64 = 1e-12;
const TELESCOPING_POINTS: usize = 10_000;
const RATIO_FACTOR: f64 = 2.0;
const BORDER_SAMPLE: usize = 100_000;
const RATE_GRID: [usize; 5] = [100, 200, 400, 800, 1600];
const RATE_REPLICATIONS: usize = 5;
const INTERACTION_GRID: [usize; 2] = [400, 1600];
const INTERACTION_REPLICATIONS: usize = 5;

struct Outcome {
    passed: bool,
    detail: String,
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn c1_gradient() -> Outcome {
    let r = gradcheck(GRAD_INSTANCES, 7).expect("gradcheck runs");
    Outcome {
        passed: r.max_rel_error <= GRAD_REL_TOL && r.instances >= GRAD_INSTANCES,
        detail: format!(
            "max rel err {:.2e} <= {GRAD_REL_TOL:.0e} over {} instances, {} components",
            r.max_rel_error, r.instances, r.components
        ),
    }
}

fn c2_pl() -> Outcome {
    let r = verify_pl(PL_INSTANCES, 11).expect("pl suite runs");
    Outcome {
        passed: r.failures == 0 && r.min_slack >= PL_SLACK,
        detail: format!(
            "{} failures over {} instances, min slack {:.2e} >= {PL_SLACK:.0e}",
            r.failures, r.instances, r.min_slack
        ),
    }
}

fn c3_descent() -> Outcome {
    let r = verify_descent(DESCENT_RUNS, 200, 2.0, 3).expect("descent suite runs");
    Outcome {
        passed: r.descent_violations == 0 && r.runs == DESCENT_RUNS,
        detail: format!(
            "{} violations over {} runs / {} steps with step size 1/L_est",
            r.descent_violations, r.runs, r.steps
        ),
    }
}

fn c4_indicator() -> Outcome {
    let mut configs = 0;
    let mut violations = 0;
    let mut worst_inner: f64 = 1.0;
    let mut worst_outer: f64 = 0.0;
    for d in 1..=3 {
        for delta in [0.05, 0.1, 0.2] {
            for s in [1, 2] {
                for depth in [2, 3] {
                    let mut o = Lemma5Options::new(d, delta, s);
                    o.depth = depth;
                    o.trials = INDICATOR_TRIALS;
                    o.points = INDICATOR_POINTS;
                    o.seed = derive_seed(5, &[d as u64, s as u64, depth as u64, delta.to_bits()]);
                    let r = verify_lemma5(&o).expect("hypotheses hold");
                    configs += 1;
                    violations += r.inner.violations + r.outer.violations;
                    worst_inner = worst_inner.min(r.inner.min / (1.0 - r.accuracy));
                    worst_outer = worst_outer.max(r.outer.max / r.accuracy);
                }
            }
        }
    }
    Outcome {
        passed: violations == 0,
        detail: format!(
            "{violations} violations over {configs} configurations (d, delta, s, L); worst inner value / (1 - n^-s) = {worst_inner:.6}, worst outer value / n^-s = {worst_outer:.3}"
        ),
    }
}

fn c5_multiscale() -> Outcome {
    let mut sos = Vec::new();
    let mut tele_ok = true;
    let mut terms_ok = true;
    let mut worst_tele: f64 = 0.0;
    let mut terms = Vec::new();
    for l in 1..=3 {
        let r = verify_lemma8(&Lemma8Options {
            d: 1,
            l,
            delta: None,
            n: 1000.0,
            s: 2,
            sample: 10_000,
            points: TELESCOPING_POINTS,
            seed: 17,
        })
        .expect("construction succeeds");
        tele_ok &= r.telescoping.missing == 0 && r.telescoping.max_abs_error <= TELESCOPING_TOL;
        worst_tele = worst_tele.max(r.telescoping.max_abs_error);
        terms_ok &= r.term_count as f64 <= r.term_bound;
        terms.push(format!("{}<={}", r.term_count, r.term_bound));
        sos.push(r.replicated_sum_of_squares);
    }
    let predicted = 2f64.powi(-2);
    let ratios: Vec<f64> = sos.windows(2).map(|w| w[1] / w[0]).collect();
    let ratio_ok = ratios.iter().all(|&r| r >= predicted / RATIO_FACTOR && r <= predicted * RATIO_FACTOR);
    Outcome {
        passed: tele_ok && terms_ok && ratio_ok,
        detail: format!(
            "telescoping max err {worst_tele:.1e} ({}), term counts {} ({}), sum-of-squares ratios {:?} vs {predicted} within x{RATIO_FACTOR} ({})",
            ok(tele_ok),
            terms.join(", "),
            ok(terms_ok),
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>(),
            ok(ratio_ok)
        ),
    }
}

fn c6_border() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    let mut checks = 0;
    for d in 1..=3 {
        let sample = uniform_sample(d, BORDER_SAMPLE, derive_seed(23, &[d as u64]));
        for k in 1..=3usize {
            let delta = 2f64.powi(-(k as i32)) / 8.0;
            let cov = build_covering(k, delta, d, &sample).expect("covering precondition holds");
            let level = &cov.levels[k];
            let bound = 4.0 * d as f64 * 2f64.powi(k as i32) * delta;
            worst_ratio = worst_ratio.max(level.union_border_mass / bound);
            checks += 1;
        }
    }
    Outcome {
        passed: worst_ratio <= 1.0,
        detail: format!("max border mass / (4 d 2^k delta) = {worst_ratio:.3} <= 1 over {checks} (d, k) pairs, {BORDER_SAMPLE} points"),
    }
}

fn base_config(d: usize, target: TargetSpec, estimator: EstimatorSpec, t_n: u64) -> ExperimentConfig {
    ExperimentConfig {
        d,
        target,
        noise: NoiseModel::gaussian(0.1),
        estimator,
        hyper: HyperConfig {
            c1: 1.0,
            c2: 1.0,
            c3: 0.01,
            c4: 1.0,
            c5: None,
            c6: 1.0,
            tau: None,
            l_n: LnRule::Auto { safety: 2.0, drift_consistent: true, power_iters: 20 },
            t_n: Some(t_n),
        },
        n_grid: vec![],
        replications: 1,
        n_mc: 10_000,
        master_seed: 2024,
        output_dir: None,
    }
}

fn cone() -> TargetSpec {
    TargetSpec { kind: "lipschitz-cone".into(), p: 1.0, c: 1.0, params: TargetParams::default() }
}

fn plain(subnets: usize) -> EstimatorSpec {
    EstimatorSpec { kind: EstimatorKind::Plain, d_star: None, depth: 2, width: 4, subnets, subnets_per_n: None }
}

fn c7_sanity() -> Outcome {
    let n = 400;
    let mut cfg = base_config(1, cone(), plain(200), 2000);
    cfg.n_grid = vec![n];
    let target = cfg.target().unwrap();
    let cell = build_cell(&cfg, &target, n, 0).expect("cell builds");
    let CellModel::Plain(w0) = &cell.model else { unreachable!() };
    let trace = train(w0, &cell.data, &cell.hp).expect("training runs");
    let beta = cell.hp.beta();
    let est = trace.estimator();
    let probe = uniform_sample(1, 10_000, 99);
    let grid = (0..=1000).map(|i| i as f64 / 1000.0);
    let sup = probe.iter().copied().chain(grid).map(|x| est.predict(&[x]).abs()).fold(0.0, f64::max);
    let ln_n = (n as f64).ln();
    let descent = check_descent(&trace, cell.hp.l_n);
    let ratio = cell.hp.t_n as f64 / (cell.hp.l_n * ln_n);
    let passed = trace.final_risk() < trace.initial_risk() && sup <= beta && trace.final_drift() <= ln_n;
    Outcome {
        passed,
        detail: format!(
            "risk {:.4e} -> {:.4e}, sup |m_n| {sup:.3} <= beta {beta:.3}, drift {:.3} <= ln n {ln_n:.3}; t_n = {}, L_n = {:.1}, t_n/(L_n ln n) = {ratio:.2}, descent violations {}",
            trace.initial_risk(),
            trace.final_risk(),
            trace.final_drift(),
            cell.hp.t_n,
            cell.hp.l_n,
            descent.violations()
        ),
    }
}

fn c8_trend() -> Outcome {
    let mut est = plain(1);
    est.subnets_per_n = Some(0.125);
    let mut cfg = base_config(1, cone(), est, 500);
    cfg.n_grid = RATE_GRID.to_vec();
    cfg.replications = RATE_REPLICATIONS;
    let r = run_experiment(&cfg).expect("rate experiment runs");
    let means: Vec<f64> = r.per_n.iter().map(|s| s.mean).collect();
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    let slope = r.slope.as_ref().map(|s| s.slope).unwrap_or(f64::NAN);
    Outcome {
        passed: decreasing && slope < 0.0,
        detail: format!(
            "means {:?} strictly decreasing ({}), fitted slope {slope:.3} < 0 (reference -1/(1+d) = -0.5)",
            means.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>(),
            ok(decreasing)
        ),
    }
}

fn c9_interaction() -> Outcome {
    let additive = TargetSpec {
        kind: "additive-interaction".into(),
        p: 1.0,
        c: 1.0,
        params: TargetParams { d_star: Some(1), ..Default::default() },
    };
    // 84 * (4 * 4 + 5 + 1) = 3 * 44 * (4 * 2 + 5 + 1) = 1848 weights
    let inter = EstimatorSpec {
        kind: EstimatorKind::Interaction,
        d_star: Some(1),
        depth: 2,
        width: 4,
        subnets: 44,
        subnets_per_n: None,
    };
    let run = |e: EstimatorSpec| -> RateReport {
        let mut cfg = base_config(3, additive.clone(), e, 500);
        cfg.n_grid = INTERACTION_GRID.to_vec();
        cfg.replications = INTERACTION_REPLICATIONS;
        run_experiment(&cfg).expect("experiment runs")
    };
    let p = run(plain(84));
    let i = run(inter);
    let budget = (p.cells[0].weight_count, i.cells[0].weight_count);
    let mut passed = budget.0 == budget.1;
    let mut parts = Vec::new();
    for &n in &INTERACTION_GRID {
        let pairs: Vec<(f64, f64)> = p
            .cells
            .iter()
            .filter(|c| c.n == n)
            .map(|c| {
                let twin = i.cells.iter().find(|t| t.n == n && t.replication == c.replication).unwrap();
                (twin.l2_error, c.l2_error)
            })
            .collect();
        let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
        let k = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / k;
        let sd = (diffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        let wins = diffs.iter().filter(|&&x| x <= 0.0).count();
        passed &= mean <= 0.0;
        let (mi, mp) = (pairs.iter().map(|p| p.0).sum::<f64>() / k, pairs.iter().map(|p| p.1).sum::<f64>() / k);
        parts.push(format!(
            "n={n}: {mi:.3e} vs {mp:.3e}, paired t = {:.2}, {wins}/{} wins",
            mean / (sd / k.sqrt()),
            diffs.len()
        ));
    }
    Outcome {
        passed,
        detail: format!("interaction vs plain mean L2 at {} weights each: {}", budget.0, parts.join("; ")),
    }
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_overparam"))
            .args(["rate", "--n-grid", "50,100,200", "--replications", "2", "--subnets", "10", "--t-n", "40"])
            .args(["--n-mc", "2000", "--seed", "31", "--out-dir"])
            .arg(&out)
            .env("OVERPARAM_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        (fs::read(out.join("rate.csv")).unwrap(), fs::read(out.join("summary.csv")).unwrap())
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "3");
    let same = a == b && a == c;
    Outcome {
        passed: same,
        detail: format!("rate.csv and summary.csv byte-identical across 3 runs (1, 1 and 3 threads): {}", ok(same)),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "failed"
    }
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "gradient correctness", limit: minutes(2), run: c1_gradient },
        Criterion { id: 2, name: "PL inequality", limit: minutes(2), run: c2_pl },
        Criterion { id: 3, name: "descent recursion", limit: minutes(5), run: c3_descent },
        Criterion { id: 4, name: "indicator guarantee", limit: minutes(5), run: c4_indicator },
        Criterion { id: 5, name: "multiscale construction", limit: minutes(5), run: c5_multiscale },
        Criterion { id: 6, name: "covering border mass", limit: minutes(1), run: c6_border },
        Criterion { id: 7, name: "estimator sanity and drift", limit: minutes(10), run: c7_sanity },
        Criterion { id: 8, name: "convergence trend", limit: minutes(60), run: c8_trend },
        Criterion { id: 9, name: "interaction advantage", limit: minutes(60), run: c9_interaction },
        Criterion { id: 10, name: "determinism", limit: minutes(5), run: c10_determinism },
    ];
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for c in &criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&c.id)) {
            continue;
        }
        let start = Instant::now();
        let out = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let passed = out.passed && in_time;
        println!(
            "{} criterion {:>2} {}: {} [{:.1} s, limit {} s]",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            out.detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
        if !passed {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
