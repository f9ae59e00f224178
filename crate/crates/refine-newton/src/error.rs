use numerics::SolveReport;
use thiserror::Error;

/// Failures while building regions or running a refinement.
#[derive(Debug, Error)]
pub enum RefineError {
    #[error("{0} initializers but {1} known components")]
    CountMismatch(usize, usize),
    #[error("dimension mismatch between initializers, samples, and regions")]
    DimensionMismatch,
    #[error("initializers {0} and {1} coincide, slab direction undefined")]
    CoincidentInitializers(usize, usize),
    #[error("weights must be positive and sum to 1 (sum off by {0:.3e})")]
    BadWeights(f64),
    #[error("scales must be positive and finite")]
    BadScale,
    #[error("slab directions must be unit vectors of the anchor dimension")]
    BadDirection,
    #[error("slab halfwidth and ball radius must be positive")]
    BadExtent,
    #[error("exact quadrature is one-dimensional, got dimension {0}")]
    QuadratureDimension(usize),
    #[error("region of component {0} captured no samples")]
    EmptyRegion(usize),
    #[error("Jacobian estimate lost diagonal dominance before step {at}")]
    Dominance { at: usize, report: Box<SolveReport> },
    #[error("Jacobian estimate singular before step {at}")]
    Singular { at: usize, report: Box<SolveReport> },
}
