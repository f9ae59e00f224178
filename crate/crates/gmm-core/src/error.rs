use thiserror::Error;

/// Errors raised while constructing, parsing, or comparing mixtures.
#[derive(Debug, Error)]
pub enum MixtureError {
    #[error("mixture must have at least one component")]
    Empty,

    #[error("component {index}: weight {w} outside (0, 1]")]
    BadWeight { index: usize, w: f64 },

    #[error("component {index}: sigma {sigma} must be positive and finite")]
    BadSigma { index: usize, sigma: f64 },

    #[error("component {index}: mean has a non-finite coordinate")]
    BadMean { index: usize },

    #[error("component {index}: dimension {got} differs from component 0 dimension {expected}")]
    MixedDimensions {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("weights sum to {sum:e}, expected 1 within {tol:e}")]
    WeightSum { sum: f64, tol: f64 },

    #[error("declared dimension {declared} does not match component dimension {got}")]
    DeclaredDimension { declared: usize, got: usize },

    #[error("mixtures not comparable: k {k_a} vs {k_b}, d {d_a} vs {d_b}")]
    Incomparable {
        k_a: usize,
        k_b: usize,
        d_a: usize,
        d_b: usize,
    },

    #[error("point dimension {got} does not match mixture dimension {expected}")]
    PointDimension { expected: usize, got: usize },

    #[error("invalid mixture JSON: {0}")]
    Json(#[from] serde_json::Error),
}
