//! Error type shared across the initializer pipeline.

use thiserror::Error;

use crate::filter::LocalMaxCandidate;

#[derive(Debug, Error)]
pub enum InitError {
    #[error("invalid net configuration: {reason}")]
    BadConfig { reason: String },
    #[error(
        "grid of {points:.3e} points exceeds the {guard:.1e}-point guard; \
         spacing of at least {required_spacing:.6e} fits"
    )]
    NetTooFine {
        points: f64,
        guard: f64,
        required_spacing: f64,
    },
    #[error("dimension {d} unsupported; the net initializer handles d <= {max}")]
    DimensionTooHigh { d: usize, max: usize },
    #[error("{found} local-maximum candidates cannot seed {needed} clusters")]
    TooFewCandidates {
        found: usize,
        needed: usize,
        /// Every accepted candidate, for diagnosing a net that is too
        /// coarse or estimates that are too noisy.
        candidates: Vec<LocalMaxCandidate>,
    },
    #[error(
        "{found} accepted candidates exceed the {cap}-point clustering cap; \
         estimates are too noisy or the acceptance thresholds too loose"
    )]
    TooManyCandidates { found: usize, cap: usize },
    #[error(
        "density log-ratio not positive at kappa {kappa}: f(center) = {center}, \
         f(probe) = {probe}; retry with a smaller kappa"
    )]
    SigmaLogRatio { kappa: f64, center: f64, probe: f64 },
    #[error("no kappa produced a usable scale estimate for component {component}")]
    SigmaEstimation { component: usize },
    #[error("no samples fell in the weight ball of component {component}")]
    WeightBallEmpty { component: usize },
    #[error("exact weight integration supports d <= 2, got {d}")]
    ExactWeightDimension { d: usize },
}
