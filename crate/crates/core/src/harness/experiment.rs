use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{EstimatorKind, ExperimentConfig, LnRule};
use super::slope::{fit_slope, SlopeFit};
use crate::error::{Error, Result};
use crate::interaction::{init_interaction, InteractionSpec, InteractionWeights};
use crate::net::{init_weights, ConditionCheck, HyperParams, Topology, WeightVector};
use crate::optim::{
    empirical_risk, estimate_curvature, step_count, theorem_schedule, train, Dataset, Model, ResolvedSchedule,
    Schedule, ScheduleMode, TrainTrace,
};
use crate::rng::derive_seed;
use crate::synth::{l2_error, sample_dataset, TargetFunction};

pub const RATE_CSV_VERSION: &str = "# overparam rate v1";
pub const SUMMARY_CSV_VERSION: &str = "# overparam rate-summary v1";

const DATA_TAG: u64 = 1;
const INIT_TAG: u64 = 2;
const MC_TAG: u64 = 3;
const CURVATURE_TAG: u64 = 4;

#[derive(Clone, Debug)]
pub enum CellModel {
    Plain(WeightVector),
    Interaction(InteractionWeights),
}

/// Everything one `(n, replication)` run needs, with its schedule resolved.
#[derive(Clone, Debug)]
pub struct Cell {
    pub n: usize,
    pub replication: usize,
    pub data: Dataset,
    pub hp: HyperParams,
    pub model: CellModel,
    pub schedule: Schedule,
    pub initial_risk: f64,
    /// Curvature estimate at the initial weights, when the rule uses one.
    pub curvature: Option<f64>,
    pub mc_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub n: usize,
    pub replication: usize,
    pub l2_error: f64,
    pub std_error: f64,
    pub initial_risk: f64,
    pub final_risk: f64,
    pub final_drift: f64,
    pub l_n: f64,
    pub t_n: u64,
    pub weight_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NSummary {
    pub n: usize,
    pub mean: f64,
    /// Standard error over replications, or the Monte Carlo standard error
    /// when there is a single replication.
    pub std_error: f64,
    pub replications: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceSlope {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleEntry {
    pub n: usize,
    pub schedule: Schedule,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub estimator: EstimatorKind,
    pub d: usize,
    pub d_star: Option<usize>,
    pub cells: Vec<CellResult>,
    pub per_n: Vec<NSummary>,
    /// Log-log least squares fit of the replication means, with at least
    /// three grid points.
    pub slope: Option<SlopeFit>,
    pub reference_slopes: Vec<ReferenceSlope>,
    /// Compatibility conditions of the constants at the largest `n`.
    pub conditions: Vec<ConditionCheck>,
    pub schedules: Vec<ScheduleEntry>,
}

/// Seeds of a cell depend only on the master seed, `n` and the replication,
/// so data and Monte Carlo points agree across estimator kinds.
fn cell_seed(cfg: &ExperimentConfig, n: usize, rep: usize) -> u64 {
    derive_seed(cfg.master_seed, &[n as u64, rep as u64])
}

/// Samples data, initializes weights and resolves `L_n` and `t_n`.
pub fn build_cell(cfg: &ExperimentConfig, target: &TargetFunction, n: usize, replication: usize) -> Result<Cell> {
    let seed = cell_seed(cfg, n, replication);
    let data = sample_dataset(target, &cfg.noise, n, derive_seed(seed, &[DATA_TAG]))?;
    let mut hp = cfg.hyper_params(n, target.sup_bound());
    hp.validate()?;
    let init_seed = derive_seed(seed, &[INIT_TAG]);
    let e = &cfg.estimator;
    let k = e.subnets_at(n);
    let (model, topo) = match e.kind {
        EstimatorKind::Plain => {
            let topo = Topology::new(cfg.d, e.depth, e.width, k)?;
            (CellModel::Plain(init_weights(topo, &hp, init_seed)), topo)
        }
        EstimatorKind::Interaction => {
            let d_star = e.d_star.ok_or_else(|| Error::Config("interaction needs d_star".into()))?;
            let spec = InteractionSpec::new(cfg.d, d_star, e.depth, e.width, k)?;
            let topo = spec.group;
            (CellModel::Interaction(init_interaction(spec, &hp, init_seed)), topo)
        }
    };
    let curvature_seed = derive_seed(seed, &[CURVATURE_TAG]);
    let (initial_risk, l_n, curvature) = match &model {
        CellModel::Plain(w) => resolve_l_n(cfg, w, &data, &hp, curvature_seed)?,
        CellModel::Interaction(w) => resolve_l_n(cfg, w, &data, &hp, curvature_seed)?,
    };
    let t_n = cfg.hyper.t_n.unwrap_or_else(|| step_count(hp.c6, l_n, hp.ln_n()));
    hp.l_n = l_n;
    hp.t_n = t_n;
    hp.desk.l_n = Some(l_n);
    let mut schedule = theorem_schedule(n, &topo, &hp, ScheduleMode::Desk);
    schedule.resolved = Some(ResolvedSchedule { k, l_n, t_n, step_size: hp.step_size() });
    Ok(Cell {
        n,
        replication,
        data,
        hp,
        model,
        schedule,
        initial_risk,
        curvature,
        mc_seed: derive_seed(seed, &[MC_TAG]),
    })
}

fn resolve_l_n<M: Model>(
    cfg: &ExperimentConfig,
    w0: &M,
    data: &Dataset,
    hp: &HyperParams,
    seed: u64,
) -> Result<(f64, f64, Option<f64>)> {
    let f0 = empirical_risk(w0, data, hp.c3)?;
    match cfg.hyper.l_n {
        LnRule::Fixed { value } => Ok((f0, value, None)),
        LnRule::Auto { safety, drift_consistent, power_iters } => {
            let est = estimate_curvature(w0, data, hp.c3, power_iters, seed)?;
            let mut l_n = safety * est;
            if drift_consistent {
                if let Some(t_n) = cfg.hyper.t_n {
                    l_n = l_n.max(2.0 * t_n as f64 * f0 / hp.ln_n().powi(2));
                }
            }
            if !(l_n > 0.0 && l_n.is_finite()) {
                return Err(Error::InvalidHyperParams(format!("resolved L_n = {l_n} is unusable")));
            }
            Ok((f0, l_n, Some(est)))
        }
    }
}

/// Trains the cell's model and measures the truncated estimate.
pub fn run_cell(cell: &Cell, target: &TargetFunction, n_mc: usize) -> Result<CellResult> {
    match &cell.model {
        CellModel::Plain(w) => finish(cell, target, n_mc, train(w, &cell.data, &cell.hp)?),
        CellModel::Interaction(w) => finish(cell, target, n_mc, train(w, &cell.data, &cell.hp)?),
    }
}

fn finish<M: Model>(cell: &Cell, target: &TargetFunction, n_mc: usize, trace: TrainTrace<M>) -> Result<CellResult> {
    let est = trace.estimator();
    let l2 = l2_error(|x| est.predict(x), target, n_mc, cell.mc_seed);
    Ok(CellResult {
        n: cell.n,
        replication: cell.replication,
        l2_error: l2.mean,
        std_error: l2.std_error,
        initial_risk: trace.initial_risk(),
        final_risk: trace.final_risk(),
        final_drift: trace.final_drift(),
        l_n: cell.hp.l_n,
        t_n: cell.hp.t_n,
        weight_count: trace.final_weights.params().len(),
    })
}

/// Runs every `(n, replication)` cell and aggregates per `n`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    let target = cfg.target()?;
    let jobs: Vec<(usize, usize)> =
        cfg.n_grid.iter().flat_map(|&n| (0..cfg.replications).map(move |r| (n, r))).collect();
    let outcomes: Vec<(CellResult, Option<Schedule>)> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            let wrap = |e: Error| Error::Cell { n, replication: rep, source: Box::new(e) };
            let cell = build_cell(cfg, &target, n, rep).map_err(wrap)?;
            let result = run_cell(&cell, &target, cfg.n_mc).map_err(wrap)?;
            Ok((result, (rep == 0).then(|| cell.schedule.clone())))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(outcomes.len());
    let mut schedules = Vec::new();
    for (result, schedule) in outcomes {
        if let Some(schedule) = schedule {
            schedules.push(ScheduleEntry { n: result.n, schedule });
        }
        cells.push(result);
    }
    let per_n: Vec<NSummary> = cfg.n_grid.iter().map(|&n| summarize(n, &cells)).collect();
    let slope = if per_n.len() >= 3 && per_n.iter().all(|s| s.mean > 0.0) {
        fit_slope(&per_n.iter().map(|s| (s.n as f64, s.mean)).collect::<Vec<_>>()).ok()
    } else {
        None
    };
    let mut reference_slopes = Vec::new();
    let d_star = match cfg.estimator.kind {
        EstimatorKind::Interaction => cfg.estimator.d_star,
        EstimatorKind::Plain => None,
    };
    if let Some(k) = d_star {
        reference_slopes.push(ReferenceSlope { label: "-1/(1+d*)".into(), value: -1.0 / (1.0 + k as f64) });
    }
    reference_slopes.push(ReferenceSlope { label: "-1/(1+d)".into(), value: -1.0 / (1.0 + cfg.d as f64) });
    let n_max = *cfg.n_grid.last().expect("validated nonempty");
    let conditions = cfg.hyper_params(n_max, target.sup_bound()).conditions();
    Ok(RateReport {
        estimator: cfg.estimator.kind,
        d: cfg.d,
        d_star,
        cells,
        per_n,
        slope,
        reference_slopes,
        conditions,
        schedules,
    })
}

fn summarize(n: usize, cells: &[CellResult]) -> NSummary {
    let errs: Vec<&CellResult> = cells.iter().filter(|c| c.n == n).collect();
    let k = errs.len() as f64;
    let mean = errs.iter().map(|c| c.l2_error).sum::<f64>() / k;
    let std_error = if errs.len() > 1 {
        let var = errs.iter().map(|c| (c.l2_error - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        errs[0].std_error
    };
    NSummary { n, mean, std_error, replications: errs.len() }
}

/// Writes `rate.csv` (one row per cell), `summary.csv` (one row per `n`)
/// and `report.json` into `dir`.
pub fn write_outputs(report: &RateReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = BufWriter::new(File::create(dir.join("rate.csv"))?);
    writeln!(out, "{RATE_CSV_VERSION}")?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record([
            "n",
            "replication",
            "l2_error",
            "std_error",
            "initial_risk",
            "final_risk",
            "final_drift",
            "l_n",
            "t_n",
        ])?;
        for c in &report.cells {
            w.write_record(&[
                c.n.to_string(),
                c.replication.to_string(),
                c.l2_error.to_string(),
                c.std_error.to_string(),
                c.initial_risk.to_string(),
                c.final_risk.to_string(),
                c.final_drift.to_string(),
                c.l_n.to_string(),
                c.t_n.to_string(),
            ])?;
        }
        w.flush()?;
    }
    out.flush()?;

    let mut out = BufWriter::new(File::create(dir.join("summary.csv"))?);
    writeln!(out, "{SUMMARY_CSV_VERSION}")?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["n", "mean_l2_error", "std_error", "replications", "ln_n", "ln_mean"])?;
        for s in &report.per_n {
            w.write_record(&[
                s.n.to_string(),
                s.mean.to_string(),
                s.std_error.to_string(),
                s.replications.to_string(),
                (s.n as f64).ln().to_string(),
                s.mean.ln().to_string(),
            ])?;
        }
        w.flush()?;
    }
    out.flush()?;

    let mut out = BufWriter::new(File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
