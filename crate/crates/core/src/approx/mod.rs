//! Explicit networks: a steep-sigmoid indicator of an axis-parallel box and
//! a multiscale piecewise-constant approximation built from such indicators
//! on shifted dyadic coverings.

mod axis_box;
mod covering;
mod indicator;
mod multiscale;

pub use axis_box::AxisBox;
pub use covering::{build_covering, uniform_sample, CoveringLevel, MultiscaleCovering};
pub use indicator::{
    build_indicator, indicator_sample_size, verify_indicator, HypothesisViolation, IndicatorNetSpec, IndicatorReport,
    RegionStats, VerifyOptions,
};
pub use multiscale::{
    approx_error, build_multiscale_net, init_range_compatible, MultiscaleNet, MultiscaleSpec, TelescopingReport, Term,
};
