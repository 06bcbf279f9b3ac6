//! Over-parametrized deep logistic network regression learned by gradient descent.
//!
//! The estimator is a linear combination of `K` parallel fully connected
//! sigmoid networks of depth `L` and width `r`. All weights start from a
//! random initialization with zero outer weights and are moved by full-batch
//! gradient descent on a ridge-regularized empirical risk. The final estimate
//! is the trained network truncated at `beta_n = c4 * ln n`.
//!
//! Besides the estimator itself the crate contains:
//!
//! * [`approx`]: explicit constructions of smooth box indicators and the
//!   multiscale telescoping approximation built from them, with verifiers.
//! * [`interaction`]: the additive-interaction variant where one group of
//!   parallel networks sees each `d*`-subset of the coordinates.
//! * [`synth`]: target functions of known Hölder smoothness, data sampling and
//!   Monte Carlo `L2` errors.
//! * [`harness`]: experiment runner, log-log slope fitting and the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod approx;
pub mod error;
pub mod harness;
pub mod interaction;
pub mod net;
pub mod optim;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use net::{forward, sigma, truncate, HyperParams, Topology, WeightVector};
pub use optim::{Dataset, TrainTrace};
