//! Parameter initialization for well-separated spherical mixtures in low
//! dimension.
//!
//! The density of such a mixture peaks near each component mean, and under
//! enough separation those peaks are the only regions where the density is
//! large, the gradient is relatively small, and the Hessian is strongly
//! negative. This crate searches a grid over the relevant ball for points
//! passing those three tests, clusters the survivors, and reads off one
//! mean per cluster; component widths then come from a two-point density
//! ratio and weights from ball-mass counts.
//!
//! Density information comes from either of two interchangeable sources:
//! sample-based ball statistics, or the closed-form density of known
//! parameters. The second exists so tests can separate algorithmic error
//! from statistical error.
//!
//! Nets grow exponentially with dimension, so everything here is capped at
//! six dimensions; higher-dimensional problems should be projected down
//! first.

mod cluster;
mod config;
mod error;
mod estimate;
mod filter;
mod geometry;
mod net;
mod pipeline;
mod scales;

pub use cluster::single_linkage_cluster;
pub use config::{NetConfig, DEFAULT_C0, DEFAULT_MAX_POINTS};
pub use error::InitError;
pub use estimate::{
    estimate_density_derivatives, exact_density_derivatives, DensityOracle, PointEstimate,
    SampleCells,
};
pub use filter::{evaluate_candidates, find_approx_maxima, LocalMaxCandidate, Thresholds};
pub use net::build_net;
pub use pipeline::{initialize, InitReport, InitSource};
pub use scales::{ball_mass_constant, estimate_sigma, estimate_weight, exact_weight, ScaleEstimate};
