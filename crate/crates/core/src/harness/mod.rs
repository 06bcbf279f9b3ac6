//! Experiment configuration, convergence-rate sweeps, verification suites
//! and the command line front end.

pub mod cli;
mod config;
mod experiment;
mod slope;
mod suites;

pub use config::{EstimatorKind, EstimatorSpec, ExperimentConfig, HyperConfig, LnRule};
pub use experiment::{
    build_cell, run_cell, run_experiment, write_outputs, Cell, CellModel, CellResult, NSummary, RateReport,
    ReferenceSlope, ScheduleEntry, RATE_CSV_VERSION, SUMMARY_CSV_VERSION,
};
pub use slope::{fit_slope, SlopeFit};
pub use suites::{
    gradcheck, relative_error, verify_descent, verify_lemma5, verify_lemma8, verify_pl, BorderLevel,
    DescentSuiteReport, GradCheckReport, Lemma5Options, Lemma8Options, Lemma8Report, PlSuiteReport,
};
