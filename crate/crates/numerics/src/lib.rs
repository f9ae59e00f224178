//! Newton solver for noisy nonlinear systems, diagonal-dominance
//! certificates, finite differences, and adaptive quadrature.
//!
//! Everything is measured in infinity norms: vectors by `amax`, matrices by
//! maximum absolute row sum. The solver makes no globalization attempt; it
//! is built for the regime where theory hands you a starting point inside
//! the quadratic basin and you want the per-step diagnostics (dominance
//! margins, inverse-norm bounds) to audit the error recursion afterwards.

mod fd;
mod newton;
mod norms;
pub mod quadrature;

pub use fd::finite_diff_jacobian;
pub use newton::{
    newton_solve, OracleAccuracy, SolveConfig, SolveReport, SystemOracle, Termination,
};
pub use norms::{inf_operator_norm, varah_inverse_bound, Dominance};
