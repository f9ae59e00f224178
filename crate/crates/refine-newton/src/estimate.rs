//! Region-restricted moment estimators.
//!
//! Everything here evaluates restricted first and second moments of the
//! mixture over the capture regions, either from real samples, by adaptive
//! quadrature (one-dimensional), or by Monte Carlo over fresh synthetic
//! draws. The normalized value function and its Jacobian are
//!
//! ```text
//! F_j(x)        = (1/(w_j sigma_j)) sum_i w_i  int_{S_j} (y - z_j) g(y; sigma_i x_i, sigma_i) dy
//! dF_j/dx_i     = (2 pi w_i/(w_j sigma_j sigma_i)) int_{S_j} (y - z_j)(y - sigma_i x_i)^T g dy
//! ```
//!
//! with `g(y; m, s) = s^{-d} exp(-pi ||y - m||^2 / s^2)`. All integrands are
//! evaluated in offsets `u = y - z_j`, so only the relative positions
//! `sigma_i x_i - z_j` ever enter; translating anchors and means together
//! leaves every arithmetic operation unchanged.

use gmm_core::{stream::substream, SampleBatch};
use nalgebra::{DMatrix, DVector};
use numerics::quadrature::{integrate, QuadResult};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::RefineConfig;
use crate::error::RefineError;
use crate::region::{Knowns, Region};

/// Absolute tolerance of the one-dimensional quadrature oracle.
pub const EXACT_QUADRATURE_TOL: f64 = 1e-12;

/// Integrands are cut off this many scale units from the component center,
/// where the density has decayed below any representable contribution.
const CLIP_SIGMAS: f64 = 9.0;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// A stacked per-component vector estimate with its statistical tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub value: DVector<f64>,
    /// Per-coordinate one-sigma standard errors (Monte Carlo) or accumulated
    /// quadrature error estimates.
    pub coordinate_errors: DVector<f64>,
    /// Three-sigma infinity-norm tolerance; the max error estimate on the
    /// quadrature path.
    pub tolerance: f64,
    /// Components whose region captured nothing; their entries are zero and
    /// their errors infinite.
    pub empty_components: Vec<usize>,
}

/// A block Jacobian estimate with entrywise errors and an operator-norm
/// tolerance (max over row blocks of summed per-block bounds).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEstimate {
    pub value: DMatrix<f64>,
    pub entry_errors: DMatrix<f64>,
    pub tolerance: f64,
}

fn check_shapes(regions: &[Region], knowns: &Knowns) -> Result<(usize, usize), RefineError> {
    if regions.is_empty() || regions.len() != knowns.k() {
        return Err(RefineError::CountMismatch(regions.len(), knowns.k()));
    }
    let d = regions[0].dim();
    if regions.iter().any(|r| r.dim() != d) {
        return Err(RefineError::DimensionMismatch);
    }
    Ok((regions.len(), d))
}

/// Restricted-mean statistic of a real sample batch: for each component,
/// the average of `y - z_j` over samples captured by its region, scaled by
/// `1/(w_j sigma_j)`.
pub fn estimate_b(
    samples: &SampleBatch,
    regions: &[Region],
    knowns: &Knowns,
) -> Result<VectorEstimate, RefineError> {
    let (k, d) = check_shapes(regions, knowns)?;
    if samples.dim() != d {
        return Err(RefineError::DimensionMismatch);
    }
    let n = samples.n();

    // Fixed-size chunks keep the floating-point reduction order independent
    // of the thread count.
    let chunk_rows = 16_384;
    let partials: Vec<(Vec<f64>, Vec<f64>, Vec<usize>)> = samples
        .points()
        .par_chunks(chunk_rows * d)
        .map(|rows| {
            let mut sums = vec![0.0; k * d];
            let mut sumsq = vec![0.0; k * d];
            let mut hits = vec![0usize; k];
            for y in rows.chunks_exact(d) {
                for (j, region) in regions.iter().enumerate() {
                    if region.contains_point(y) {
                        hits[j] += 1;
                        let z = region.anchor();
                        for c in 0..d {
                            let u = y[c] - z[c];
                            sums[j * d + c] += u;
                            sumsq[j * d + c] += u * u;
                        }
                    }
                }
            }
            (sums, sumsq, hits)
        })
        .collect();

    let mut sums = vec![0.0; k * d];
    let mut sumsq = vec![0.0; k * d];
    let mut hits = vec![0usize; k];
    for (s, q, h) in &partials {
        for c in 0..k * d {
            sums[c] += s[c];
            sumsq[c] += q[c];
        }
        for j in 0..k {
            hits[j] += h[j];
        }
    }

    let mut value = DVector::zeros(k * d);
    let mut errors = DVector::zeros(k * d);
    let mut empty = Vec::new();
    let mut worst = 0.0f64;
    for j in 0..k {
        if hits[j] == 0 {
            empty.push(j);
            for c in 0..d {
                errors[j * d + c] = f64::INFINITY;
            }
            continue;
        }
        let scale = 1.0 / (knowns.weight(j) * knowns.sigma(j));
        for c in 0..d {
            let mean = sums[j * d + c] * scale / n as f64;
            let second = sumsq[j * d + c] * scale * scale / n as f64;
            let var = (second - mean * mean).max(0.0);
            let se = (var / n as f64).sqrt();
            value[j * d + c] = mean;
            errors[j * d + c] = se;
            worst = worst.max(se);
        }
    }
    let tolerance = if empty.is_empty() { 3.0 * worst } else { f64::INFINITY };
    Ok(VectorEstimate {
        value,
        coordinate_errors: errors,
        tolerance,
        empty_components: empty,
    })
}

/// Normalized value function at `x` (stacked normalized means).
pub fn eval_f(
    x: &DVector<f64>,
    regions: &[Region],
    knowns: &Knowns,
    cfg: &RefineConfig,
    round: u64,
) -> Result<VectorEstimate, RefineError> {
    let (k, d) = check_shapes(regions, knowns)?;
    if x.len() != k * d {
        return Err(RefineError::DimensionMismatch);
    }
    if cfg.exact_quadrature && d != 1 {
        return Err(RefineError::QuadratureDimension(d));
    }
    let rels = rels_from_absolute(x, regions, knowns, k, d);
    Ok(f_with_rels(&rels, regions, knowns, cfg, round))
}

/// Jacobian of the normalized value function at `x`.
pub fn eval_fprime(
    x: &DVector<f64>,
    regions: &[Region],
    knowns: &Knowns,
    cfg: &RefineConfig,
    round: u64,
) -> Result<MatrixEstimate, RefineError> {
    let (k, d) = check_shapes(regions, knowns)?;
    if x.len() != k * d {
        return Err(RefineError::DimensionMismatch);
    }
    if cfg.exact_quadrature && d != 1 {
        return Err(RefineError::QuadratureDimension(d));
    }
    let rels = rels_from_absolute(x, regions, knowns, k, d);
    Ok(fprime_with_rels(&rels, regions, knowns, cfg, round))
}

/// Relative centers `sigma_i x_i - z_j`, indexed `[j][i]`.
fn rels_from_absolute(
    x: &DVector<f64>,
    regions: &[Region],
    knowns: &Knowns,
    k: usize,
    d: usize,
) -> Vec<Vec<DVector<f64>>> {
    (0..k)
        .map(|j| {
            let z = regions[j].anchor();
            (0..k)
                .map(|i| {
                    DVector::from_fn(d, |c, _| knowns.sigma(i) * x[i * d + c] - z[c])
                })
                .collect()
        })
        .collect()
}

pub(crate) fn f_with_rels(
    rels: &[Vec<DVector<f64>>],
    regions: &[Region],
    knowns: &Knowns,
    cfg: &RefineConfig,
    round: u64,
) -> VectorEstimate {
    if cfg.exact_quadrature {
        quad_f(rels, regions, knowns)
    } else {
        mc_f(rels, regions, knowns, cfg.samples_per_component, cfg.seed, round)
    }
}

pub(crate) fn fprime_with_rels(
    rels: &[Vec<DVector<f64>>],
    regions: &[Region],
    knowns: &Knowns,
    cfg: &RefineConfig,
    round: u64,
) -> MatrixEstimate {
    if cfg.exact_quadrature {
        quad_fprime(rels, regions, knowns)
    } else {
        mc_fprime(rels, regions, knowns, cfg.samples_per_component, cfg.seed, round)
    }
}

fn quad_f(rels: &[Vec<DVector<f64>>], regions: &[Region], knowns: &Knowns) -> VectorEstimate {
    let k = regions.len();
    let mut value = DVector::zeros(k);
    let mut errors = DVector::zeros(k);
    for j in 0..k {
        let (lo, hi) = regions[j].interval();
        let scale_j = 1.0 / (knowns.weight(j) * knowns.sigma(j));
        for i in 0..k {
            let q = restricted_first_moment(lo, hi, rels[j][i][0], knowns.sigma(i), EXACT_QUADRATURE_TOL);
            let scale = scale_j * knowns.weight(i);
            value[j] += scale * q.value;
            errors[j] += scale * q.error_estimate;
        }
    }
    let tolerance = errors.amax();
    VectorEstimate {
        value,
        coordinate_errors: errors,
        tolerance,
        empty_components: Vec::new(),
    }
}

fn quad_fprime(rels: &[Vec<DVector<f64>>], regions: &[Region], knowns: &Knowns) -> MatrixEstimate {
    let k = regions.len();
    let mut value = DMatrix::zeros(k, k);
    let mut errors = DMatrix::zeros(k, k);
    let mut tolerance = 0.0f64;
    for j in 0..k {
        let (lo, hi) = regions[j].interval();
        let mut row_bound = 0.0;
        for i in 0..k {
            let q = restricted_cross_moment(lo, hi, rels[j][i][0], knowns.sigma(i), EXACT_QUADRATURE_TOL);
            let scale =
                TWO_PI * knowns.weight(i) / (knowns.weight(j) * knowns.sigma(j) * knowns.sigma(i));
            value[(j, i)] = scale * q.value;
            errors[(j, i)] = scale * q.error_estimate;
            row_bound += errors[(j, i)];
        }
        tolerance = tolerance.max(row_bound);
    }
    MatrixEstimate {
        value,
        entry_errors: errors,
        tolerance,
    }
}

fn mc_f(
    rels: &[Vec<DVector<f64>>],
    regions: &[Region],
    knowns: &Knowns,
    n_draws: usize,
    seed: u64,
    round: u64,
) -> VectorEstimate {
    let k = regions.len();
    let d = regions[0].dim();
    // One fresh substream per source component; the same draws serve every
    // target region. Partials are combined in component order so the result
    // does not depend on scheduling.
    let per_source: Vec<(Vec<f64>, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, "refine-f", &[round, i as u64]);
            let s = knowns.sigma(i) / TWO_PI.sqrt();
            let mut sums = vec![0.0; k * d];
            let mut sumsq = vec![0.0; k * d];
            let mut noise = vec![0.0; d];
            let mut u = vec![0.0; d];
            for _ in 0..n_draws {
                for c in noise.iter_mut() {
                    *c = rng.sample::<f64, _>(StandardNormal);
                }
                for (j, region) in regions.iter().enumerate() {
                    let rel = &rels[j][i];
                    for c in 0..d {
                        u[c] = rel[c] + s * noise[c];
                    }
                    if region.contains_offset(&u) {
                        for c in 0..d {
                            sums[j * d + c] += u[c];
                            sumsq[j * d + c] += u[c] * u[c];
                        }
                    }
                }
            }
            (sums, sumsq)
        })
        .collect();

    let mut value = DVector::zeros(k * d);
    let mut variance = DVector::zeros(k * d);
    let m = n_draws as f64;
    for (i, (sums, sumsq)) in per_source.iter().enumerate() {
        for j in 0..k {
            let scale = knowns.weight(i) / (knowns.weight(j) * knowns.sigma(j));
            for c in 0..d {
                let mean = sums[j * d + c] / m;
                let var = (sumsq[j * d + c] / m - mean * mean).max(0.0);
                value[j * d + c] += scale * mean;
                variance[j * d + c] += scale * scale * var / m;
            }
        }
    }
    let errors = variance.map(f64::sqrt);
    let tolerance = 3.0 * errors.amax();
    VectorEstimate {
        value,
        coordinate_errors: errors,
        tolerance,
        empty_components: Vec::new(),
    }
}

fn mc_fprime(
    rels: &[Vec<DVector<f64>>],
    regions: &[Region],
    knowns: &Knowns,
    n_draws: usize,
    seed: u64,
    round: u64,
) -> MatrixEstimate {
    let k = regions.len();
    let d = regions[0].dim();
    let per_source: Vec<(Vec<f64>, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, "refine-fp", &[round, i as u64]);
            let s = knowns.sigma(i) / TWO_PI.sqrt();
            let mut sums = vec![0.0; k * d * d];
            let mut sumsq = vec![0.0; k * d * d];
            let mut noise = vec![0.0; d];
            let mut u = vec![0.0; d];
            for _ in 0..n_draws {
                for c in noise.iter_mut() {
                    *c = rng.sample::<f64, _>(StandardNormal);
                }
                for (j, region) in regions.iter().enumerate() {
                    let rel = &rels[j][i];
                    for c in 0..d {
                        u[c] = rel[c] + s * noise[c];
                    }
                    if region.contains_offset(&u) {
                        // Summand: outer product of the offset with the
                        // centered draw `y - center = s * noise`.
                        for r in 0..d {
                            for c in 0..d {
                                let t = u[r] * s * noise[c];
                                sums[(j * d + r) * d + c] += t;
                                sumsq[(j * d + r) * d + c] += t * t;
                            }
                        }
                    }
                }
            }
            (sums, sumsq)
        })
        .collect();

    let mut value = DMatrix::zeros(k * d, k * d);
    let mut errors = DMatrix::zeros(k * d, k * d);
    let m = n_draws as f64;
    for (i, (sums, sumsq)) in per_source.iter().enumerate() {
        for j in 0..k {
            let scale =
                TWO_PI * knowns.weight(i) / (knowns.weight(j) * knowns.sigma(j) * knowns.sigma(i));
            for r in 0..d {
                for c in 0..d {
                    let mean = sums[(j * d + r) * d + c] / m;
                    let var = (sumsq[(j * d + r) * d + c] / m - mean * mean).max(0.0);
                    value[(j * d + r, i * d + c)] = scale * mean;
                    errors[(j * d + r, i * d + c)] = scale * (var / m).sqrt();
                }
            }
        }
    }
    // Operator-norm tolerance: rows of a block stack, three sigma per entry.
    let mut tolerance = 0.0f64;
    for r in 0..k * d {
        let mut row = 0.0;
        for c in 0..k * d {
            row += 3.0 * errors[(r, c)];
        }
        tolerance = tolerance.max(row);
    }
    MatrixEstimate {
        value,
        entry_errors: errors,
        tolerance,
    }
}

fn clip(lo: f64, hi: f64, rel: f64, sigma: f64) -> Option<(f64, f64)> {
    let a = lo.max(rel - CLIP_SIGMAS * sigma);
    let b = hi.min(rel + CLIP_SIGMAS * sigma);
    if a < b {
        Some((a, b))
    } else {
        None
    }
}

fn zero_quad() -> QuadResult {
    QuadResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    }
}

fn density_1d(t: f64, sigma: f64) -> f64 {
    (-std::f64::consts::PI * t * t / (sigma * sigma)).exp() / sigma
}

/// `int u g(u - rel; sigma) du` over the offset interval, clipped.
pub(crate) fn restricted_first_moment(
    lo: f64,
    hi: f64,
    rel: f64,
    sigma: f64,
    abs_tol: f64,
) -> QuadResult {
    match clip(lo, hi, rel, sigma) {
        Some((a, b)) => integrate(|u| u * density_1d(u - rel, sigma), a, b, abs_tol, 0.0),
        None => zero_quad(),
    }
}

/// `int u (u - rel) g(u - rel; sigma) du` over the offset interval, clipped.
pub(crate) fn restricted_cross_moment(
    lo: f64,
    hi: f64,
    rel: f64,
    sigma: f64,
    abs_tol: f64,
) -> QuadResult {
    match clip(lo, hi, rel, sigma) {
        Some((a, b)) => integrate(
            |u| u * (u - rel) * density_1d(u - rel, sigma),
            a,
            b,
            abs_tol,
            0.0,
        ),
        None => zero_quad(),
    }
}

/// `int g(u - rel; sigma) du` over the offset interval, clipped.
pub(crate) fn restricted_mass(lo: f64, hi: f64, rel: f64, sigma: f64, abs_tol: f64) -> QuadResult {
    match clip(lo, hi, rel, sigma) {
        Some((a, b)) => integrate(|u| density_1d(u - rel, sigma), a, b, abs_tol, 0.0),
        None => zero_quad(),
    }
}
