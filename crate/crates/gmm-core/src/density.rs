//! Density, gradient, and Hessian evaluation.
//!
//! All formulas use the scale convention `g(x) = sigma^{-d} exp(-pi r^2 / sigma^2)`
//! with `r = ||x - mu||`. Under it the density integrates to one and the
//! per-coordinate variance is `sigma^2 / (2 pi)`; there are no `(2 pi)^{d/2}`
//! prefactors anywhere.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::MixtureError;
use crate::mixture::{Component, MixtureParams};

/// Density of a single component at `x`. Panics if dimensions differ.
pub fn component_pdf_at(c: &Component, x: &[f64]) -> f64 {
    assert_eq!(x.len(), c.dim(), "point dimension mismatch");
    let r2: f64 = x
        .iter()
        .zip(c.mu.iter())
        .map(|(xi, mi)| (xi - mi) * (xi - mi))
        .sum();
    let s2 = c.sigma * c.sigma;
    c.sigma.powi(-(c.dim() as i32)) * (-PI * r2 / s2).exp()
}

/// Gradient of a single component's density at `x`.
pub fn component_grad_at(c: &Component, x: &[f64]) -> DVector<f64> {
    let g = component_pdf_at(c, x);
    let s2 = c.sigma * c.sigma;
    DVector::from_iterator(
        c.dim(),
        x.iter()
            .zip(c.mu.iter())
            .map(|(xi, mi)| -2.0 * PI / s2 * g * (xi - mi)),
    )
}

/// Hessian of a single component's density at `x`. Symmetric by construction.
pub fn component_hess_at(c: &Component, x: &[f64]) -> DMatrix<f64> {
    let d = c.dim();
    let g = component_pdf_at(c, x);
    let s2 = c.sigma * c.sigma;
    let quad = 4.0 * PI * PI / (s2 * s2) * g;
    let diag = -2.0 * PI / s2 * g;
    let mut h = DMatrix::zeros(d, d);
    for a in 0..d {
        let da = x[a] - c.mu[a];
        for b in a..d {
            let db = x[b] - c.mu[b];
            let mut v = quad * da * db;
            if a == b {
                v += diag;
            }
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    h
}

fn check_dim(mix: &MixtureParams, x: &[f64]) -> Result<(), MixtureError> {
    if x.len() != mix.dim() {
        return Err(MixtureError::PointDimension {
            expected: mix.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Mixture density `f(x) = sum_j w_j g_j(x)`.
pub fn pdf_at(mix: &MixtureParams, x: &[f64]) -> Result<f64, MixtureError> {
    check_dim(mix, x)?;
    Ok(mix
        .components()
        .iter()
        .map(|c| c.w * component_pdf_at(c, x))
        .sum())
}

/// Mixture gradient `grad f(x) = -2 pi sum_j (w_j / sigma_j^2) g_j(x) (x - mu_j)`.
pub fn grad_pdf_at(mix: &MixtureParams, x: &[f64]) -> Result<DVector<f64>, MixtureError> {
    check_dim(mix, x)?;
    let mut out = DVector::zeros(mix.dim());
    for c in mix.components() {
        out += c.w * component_grad_at(c, x);
    }
    Ok(out)
}

/// Mixture Hessian, the weighted sum of component Hessians.
pub fn hess_pdf_at(mix: &MixtureParams, x: &[f64]) -> Result<DMatrix<f64>, MixtureError> {
    check_dim(mix, x)?;
    let mut out = DMatrix::zeros(mix.dim(), mix.dim());
    for c in mix.components() {
        out += c.w * component_hess_at(c, x);
    }
    Ok(out)
}
