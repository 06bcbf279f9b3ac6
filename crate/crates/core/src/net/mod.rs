//! Network topology, flat weight storage, the logistic forward pass,
//! random initialization and truncation.

mod forward;
mod hyper;
mod init;
pub mod io;
mod topology;
mod weights;

pub use forward::{forward, forward_activations, sigma, truncate, Activations};
pub use hyper::{ConditionCheck, DeskOverrides, HyperParams};
pub use init::init_weights;
pub use topology::{Topology, WeightIndex};
pub use weights::WeightVector;

pub(crate) use forward::{backprop_subnet, eval_subnet};
pub(crate) use init::fill_uniform_levels;
