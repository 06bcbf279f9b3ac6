//! Regularized empirical risk, its exact gradient, the gradient descent
//! trainer with its schedules, and runtime checks of the descent and
//! Polyak-Lojasiewicz inequalities.

mod checks;
mod curvature;
mod dataset;
mod model;
mod ridge;
mod risk;
mod schedule;
mod train;

pub use checks::{check_descent, check_descent_series, check_pl, DescentReport, DescentStep, PlCheck};
pub use curvature::estimate_curvature;
pub use dataset::Dataset;
pub use model::Model;
pub use ridge::{outer_features, outer_ridge_oracle, ridge_solve, RidgeSolution};
pub use risk::{empirical_risk, gd_step, gradient, risk_and_gradient};
pub use schedule::{
    step_count, theorem_schedule, Magnitude, NominalSchedule, ResolvedSchedule, Schedule, ScheduleMode,
};
pub use train::{train, TrainTrace, TruncatedEstimator, TRACE_CSV_VERSION};
