//! Newton refinement of mixture means from restricted-mean statistics.
//!
//! Given warm initializers for the means of a well-separated spherical
//! mixture (weights and scales known), this crate sharpens the means to
//! near machine precision:
//!
//! 1. [`build_regions`] carves a slab-and-ball capture region around each
//!    initializer.
//! 2. [`estimate_b`] turns samples into per-region restricted means; the
//!    same statistics evaluate in closed form for an exact mixture.
//! 3. [`refine`] runs a guarded Newton iteration on the normalized mean
//!    offsets, with every Jacobian checked for diagonal dominance before
//!    it is inverted.
//!
//! [`eval_f`] and [`eval_fprime`] expose the underlying system map and its
//! Jacobian for diagnostics, on both the Monte Carlo and the
//! one-dimensional adaptive-quadrature paths. [`leakage_report`] audits the
//! region geometry itself.

mod config;
mod error;
mod estimate;
mod leakage;
mod refine;
mod region;

pub use config::RefineConfig;
pub use error::RefineError;
pub use estimate::{
    estimate_b, eval_f, eval_fprime, MatrixEstimate, VectorEstimate, EXACT_QUADRATURE_TOL,
};
pub use leakage::{leakage_report, ComponentLeakage, LeakageReport};
pub use refine::{refine, DataSource, RefineOutcome};
pub use region::{build_regions, Knowns, Region};
