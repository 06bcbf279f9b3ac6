//! Command line front end. Exit codes: 0 success, 1 failed check or runtime
//! error, 2 invalid configuration or arguments.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{EstimatorKind, EstimatorSpec, ExperimentConfig, HyperConfig, LnRule};
use super::experiment::{build_cell, run_experiment, write_outputs, CellModel};
use super::suites::{gradcheck, verify_descent, verify_lemma5, verify_lemma8, verify_pl, Lemma5Options, Lemma8Options};
use crate::error::{Error, Result};
use crate::net::io::save;
use crate::optim::{train, Model, TrainTrace};
use crate::synth::{NoiseKind, NoiseModel, TargetParams, TargetSpec};

#[derive(Debug, Parser)]
#[command(
    name = "overparam",
    version,
    about = "Over-parametrized logistic network regression trained by gradient descent"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train once at the first grid point; writes trace.csv and weights.
    Train(ConfigArgs),
    /// Sweep the n grid; writes rate.csv, summary.csv and report.json.
    Rate(ConfigArgs),
    /// Run a verification suite and print its JSON report.
    #[command(subcommand)]
    Verify(Verify),
    /// Compare analytic gradients with central finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        instances: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Box indicator network under weight perturbations.
    Lemma5 {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        s: u32,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        perturbation: Option<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Multiscale approximation network of a Lipschitz cone.
    Lemma8 {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        l: usize,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1000.0)]
        n: f64,
        #[arg(long, default_value_t = 2)]
        s: u32,
        #[arg(long, default_value_t = 100_000)]
        sample: usize,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Descent inequality along seeded training runs.
    Descent {
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 200)]
        steps: u64,
        #[arg(long, default_value_t = 2.0)]
        safety: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// PL inequality of the outer-weight subproblem on random instances.
    Pl {
        #[arg(long, default_value_t = 10_000)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Experiment settings: a JSON config file and/or individual overrides.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    /// constant | linear | lipschitz-cone | hoelder-bump | additive-interaction
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// none | gaussian | bounded-uniform
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub noise_scale: Option<f64>,
    /// plain | interaction
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub d_star: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub subnets: Option<usize>,
    /// Grow the network count as `max(subnets, ceil(rate * n))`.
    #[arg(long)]
    pub subnets_per_n: Option<f64>,
    #[arg(long)]
    pub c3: Option<f64>,
    #[arg(long)]
    pub c4: Option<f64>,
    #[arg(long)]
    pub c6: Option<f64>,
    /// Fixed inverse step size; otherwise a curvature estimate is used.
    #[arg(long)]
    pub l_n: Option<f64>,
    /// Safety factor on the curvature estimate.
    #[arg(long)]
    pub safety: Option<f64>,
    #[arg(long)]
    pub t_n: Option<u64>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub n_mc: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Configuration used when no file is given.
pub fn default_config() -> ExperimentConfig {
    ExperimentConfig {
        d: 1,
        target: TargetSpec { kind: "lipschitz-cone".into(), p: 1.0, c: 1.0, params: TargetParams::default() },
        noise: NoiseModel::gaussian(0.1),
        estimator: EstimatorSpec {
            kind: EstimatorKind::Plain,
            d_star: None,
            depth: 2,
            width: 4,
            subnets: 50,
            subnets_per_n: None,
        },
        hyper: HyperConfig {
            c1: 1.0,
            c2: 1.0,
            c3: 0.01,
            c4: 1.0,
            c5: None,
            c6: 1.0,
            tau: None,
            l_n: LnRule::Auto { safety: 2.0, drift_consistent: true, power_iters: 20 },
            t_n: Some(200),
        },
        n_grid: vec![100, 200, 400],
        replications: 2,
        n_mc: 10_000,
        master_seed: 0,
        output_dir: None,
    }
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
            }
            None => default_config(),
        };
        if let Some(v) = self.d {
            cfg.d = v;
        }
        if let Some(v) = &self.target {
            cfg.target.kind = v.clone();
        }
        if let Some(v) = self.p {
            cfg.target.p = v;
        }
        if let Some(v) = self.c {
            cfg.target.c = v;
        }
        if let Some(v) = &self.noise {
            let kind: NoiseKind = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            cfg.noise.kind = kind;
        }
        if let Some(v) = self.noise_scale {
            cfg.noise.scale = v;
        }
        if let Some(v) = &self.estimator {
            cfg.estimator.kind = match v.as_str() {
                "plain" => EstimatorKind::Plain,
                "interaction" => EstimatorKind::Interaction,
                other => return Err(Error::Config(format!("unknown estimator `{other}`"))),
            };
        }
        if self.d_star.is_some() {
            cfg.estimator.d_star = self.d_star;
        }
        if let Some(v) = self.depth {
            cfg.estimator.depth = v;
        }
        if let Some(v) = self.width {
            cfg.estimator.width = v;
        }
        if let Some(v) = self.subnets {
            cfg.estimator.subnets = v;
        }
        if self.subnets_per_n.is_some() {
            cfg.estimator.subnets_per_n = self.subnets_per_n;
        }
        if let Some(v) = self.c3 {
            cfg.hyper.c3 = v;
        }
        if let Some(v) = self.c4 {
            cfg.hyper.c4 = v;
        }
        if let Some(v) = self.c6 {
            cfg.hyper.c6 = v;
        }
        if let Some(v) = self.l_n {
            cfg.hyper.l_n = LnRule::Fixed { value: v };
        } else if let Some(s) = self.safety {
            cfg.hyper.l_n = match cfg.hyper.l_n {
                LnRule::Auto { drift_consistent, power_iters, .. } => {
                    LnRule::Auto { safety: s, drift_consistent, power_iters }
                }
                LnRule::Fixed { .. } => LnRule::Auto { safety: s, drift_consistent: true, power_iters: 20 },
            };
        }
        if self.t_n.is_some() {
            cfg.hyper.t_n = self.t_n;
        }
        if let Some(v) = &self.n_grid {
            cfg.n_grid = v.clone();
        }
        if let Some(v) = self.replications {
            cfg.replications = v;
        }
        if let Some(v) = self.n_mc {
            cfg.n_mc = v;
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if self.out_dir.is_some() {
            cfg.output_dir = self.out_dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(passed) => u8::from(!passed),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::Hypothesis(_)
        | Error::InvalidHyperParams(_)
        | Error::InvalidTopology(_)
        | Error::UnknownKind(_)
        | Error::TooManyGroups { .. } => 2,
        _ => 1,
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Runs a command; `Ok(false)` means a verification failed.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Train(args) => {
            let cfg = args.resolve()?;
            run_train(&cfg)?;
            Ok(true)
        }
        Command::Rate(args) => {
            let cfg = args.resolve()?;
            let report = run_experiment(&cfg)?;
            for entry in &report.schedules {
                println!("n = {}\n{}", entry.n, entry.schedule.table());
            }
            for c in &report.conditions {
                println!(
                    "{:<14} {:>12.6} (needs {}) {}",
                    c.name,
                    c.lhs,
                    c.rhs,
                    if c.holds { "ok" } else { "VIOLATED" }
                );
            }
            println!("{:>8} {:>14} {:>12} {:>5}", "n", "mean L2", "std err", "reps");
            for s in &report.per_n {
                println!("{:>8} {:>14.6e} {:>12.3e} {:>5}", s.n, s.mean, s.std_error, s.replications);
            }
            if let Some(fit) = &report.slope {
                println!("fitted slope {:.4} (std err {:.4})", fit.slope, fit.slope_std_error);
            }
            for r in &report.reference_slopes {
                println!("reference slope {} = {:.4}", r.label, r.value);
            }
            let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            write_outputs(&report, &dir)?;
            println!("wrote {}", dir.display());
            Ok(true)
        }
        Command::Verify(v) => run_verify(v),
        Command::Gradcheck { seed, instances } => {
            let report = gradcheck(instances, seed)?;
            println!("max relative error {:.3e} over {} components", report.max_rel_error, report.components);
            print_json(&report)?;
            Ok(report.max_rel_error <= 1e-6)
        }
    }
}

fn run_verify(v: Verify) -> Result<bool> {
    match v {
        Verify::Lemma5 { d, delta, s, depth, width, n, perturbation, trials, points, seed } => {
            let opts = Lemma5Options { d, delta, s, depth, width, n, perturbation, trials, points, seed };
            let report = verify_lemma5(&opts)?;
            print_json(&report)?;
            Ok(report.passed)
        }
        Verify::Lemma8 { d, l, delta, n, s, sample, points, seed } => {
            let report = verify_lemma8(&Lemma8Options { d, l, delta, n, s, sample, points, seed })?;
            print_json(&report)?;
            Ok(report.passed)
        }
        Verify::Descent { runs, steps, safety, seed } => {
            let report = verify_descent(runs, steps, safety, seed)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                runs: usize,
                steps: usize,
                descent_violations: usize,
                drift_violations: usize,
                l_est: &'a [f64],
            }
            print_json(&Summary {
                runs: report.runs,
                steps: report.steps,
                descent_violations: report.descent_violations,
                drift_violations: report.drift_violations,
                l_est: &report.l_est,
            })?;
            Ok(report.descent_violations == 0)
        }
        Verify::Pl { instances, seed } => {
            let report = verify_pl(instances, seed)?;
            print_json(&report)?;
            Ok(report.failures == 0)
        }
    }
}

fn run_train(cfg: &ExperimentConfig) -> Result<()> {
    let target = cfg.target()?;
    let n = cfg.n_grid[0];
    let cell = build_cell(cfg, &target, n, 0)?;
    println!("{}", cell.schedule.table());
    for c in cell.hp.conditions() {
        println!("{:<14} {:>12.6} (needs {}) {}", c.name, c.lhs, c.rhs, if c.holds { "ok" } else { "VIOLATED" });
    }
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    match &cell.model {
        CellModel::Plain(w) => {
            let trace = train(w, &cell.data, &cell.hp)?;
            write_trace(&trace, &dir, &[])?;
            save(&trace.final_weights, &dir.join("weights.bin"))?;
            report_trace(&trace);
        }
        CellModel::Interaction(w) => {
            let trace = train(w, &cell.data, &cell.hp)?;
            let groups = w.spec().groups();
            write_trace(&trace, &dir, &[("groups", groups.to_string())])?;
            for g in 0..groups {
                save(&trace.final_weights.group(g), &dir.join(format!("weights_group{g}.bin")))?;
            }
            report_trace(&trace);
        }
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn write_trace<M: Model>(trace: &TrainTrace<M>, dir: &Path, meta: &[(&str, String)]) -> Result<()> {
    trace.write_csv(BufWriter::new(File::create(dir.join("trace.csv"))?), meta)
}

fn report_trace<M: Model>(trace: &TrainTrace<M>) {
    println!(
        "steps {}  risk {:.6e} -> {:.6e}  drift {:.4e}",
        trace.steps(),
        trace.initial_risk(),
        trace.final_risk(),
        trace.final_drift()
    );
}
