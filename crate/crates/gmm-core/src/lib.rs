//! Data model and shared utilities for mixtures of spherical Gaussians.
//!
//! A single scale convention is used across the whole workspace: component
//! `j` has density `g_j(x) = sigma_j^{-d} exp(-pi ||x - mu_j||^2 / sigma_j^2)`,
//! i.e. covariance `(sigma_j^2 / 2 pi) I`. Every formula in this crate and
//! its dependents is written directly in that convention; nothing converts
//! through the classical standard deviation internally. The pair
//! [`sigma_to_std`] / [`std_to_sigma`] exists only for talking to code that
//! expects textbook parameters.

mod assignment;
mod density;
mod distance;
mod error;
mod facts;
mod mixture;
mod sample;
mod separation;
pub mod stream;

pub use density::{
    component_grad_at, component_hess_at, component_pdf_at, grad_pdf_at, hess_pdf_at, pdf_at,
};
pub use distance::{param_distance, Matching};
pub use error::MixtureError;
pub use facts::{gaussian_norm_tail, tv_upper_bound_pinsker, NormTail};
pub use mixture::{Component, DerivedStats, MixtureParams, WEIGHT_RENORM_TOL, WEIGHT_SUM_TOL};
pub use sample::{sample, SampleBatch, SHARD_SIZE};
pub use separation::{separation_audit, PairSeparation, Regime, SeparationReport};

/// Classical per-coordinate standard deviation for a given scale parameter.
pub fn sigma_to_std(sigma: f64) -> f64 {
    sigma / (2.0 * std::f64::consts::PI).sqrt()
}

/// Scale parameter for a given classical per-coordinate standard deviation.
pub fn std_to_sigma(std: f64) -> f64 {
    std * (2.0 * std::f64::consts::PI).sqrt()
}
