//! Reduction of sample batches to the top-k eigenspace of the second
//! moment, so downstream estimation can assume dimension at most k.
//!
//! The subspace comes from the uncentered second-moment matrix
//! `A = (1/N) sum_i x_i x_i^T`; no mean-centering happens anywhere. For a
//! mixture with means `mu_j`, `A` equals the mean outer-product term plus a
//! multiple of the identity, so the top-k eigenspace captures the span of
//! the means and shifting by the identity cannot reorder it.

use gmm_core::SampleBatch;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("need at least k = {k} samples, got {n}")]
    TooFewSamples { n: usize, k: usize },

    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("means list has {got} entries of dimension {got_dim}, samples have dimension {d}")]
    BadMeansHint { got: usize, got_dim: usize, d: usize },
}

/// Orthonormal basis of the reduced space plus the projected data.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    /// `d x r` orthonormal columns, `r = min(k, d)`.
    pub basis: DMatrix<f64>,
    /// The input batch expressed in basis coordinates (`N x r`).
    pub projected_samples: SampleBatch,
    /// Projections of caller-supplied true means, in basis coordinates.
    /// Only present when the caller passed means in for evaluation.
    pub projected_means_hint: Option<Vec<DVector<f64>>>,
    /// Square roots of the second-moment eigenvalues, descending; these are
    /// the singular values of the sample matrix scaled by `1/sqrt(N)`.
    pub singular_values: Vec<f64>,
}

impl ProjectionReport {
    /// Basis coordinates of a full-dimensional vector.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>, PcaError> {
        if x.len() != self.basis.nrows() {
            return Err(PcaError::DimensionMismatch {
                expected: self.basis.nrows(),
                got: x.len(),
            });
        }
        Ok(self.basis.tr_mul(x))
    }

    /// Maps basis coordinates back to the ambient space; `lift(project(x))`
    /// is the orthogonal projection of `x` onto the subspace.
    pub fn lift(&self, y: &DVector<f64>) -> Result<DVector<f64>, PcaError> {
        if y.len() != self.basis.ncols() {
            return Err(PcaError::DimensionMismatch {
                expected: self.basis.ncols(),
                got: y.len(),
            });
        }
        Ok(&self.basis * y)
    }
}

/// Projects a batch onto the top-k eigenspace of its second moment.
///
/// When `d <= k` the basis is the identity and the data passes through
/// unchanged. Requires `N >= k`.
pub fn reduce(samples: &SampleBatch, k: usize) -> Result<ProjectionReport, PcaError> {
    reduce_inner(samples, k, None)
}

/// Same as [`reduce`], additionally projecting known true means so tests
/// and reports can compare against ground truth.
pub fn reduce_with_means(
    samples: &SampleBatch,
    k: usize,
    true_means: &[DVector<f64>],
) -> Result<ProjectionReport, PcaError> {
    if true_means.iter().any(|m| m.len() != samples.dim()) {
        return Err(PcaError::BadMeansHint {
            got: true_means.len(),
            got_dim: true_means.first().map_or(0, |m| m.len()),
            d: samples.dim(),
        });
    }
    reduce_inner(samples, k, Some(true_means))
}

fn reduce_inner(
    samples: &SampleBatch,
    k: usize,
    true_means: Option<&[DVector<f64>]>,
) -> Result<ProjectionReport, PcaError> {
    let n = samples.n();
    let d = samples.dim();
    if n < k {
        return Err(PcaError::TooFewSamples { n, k });
    }

    // Second moment accumulated in a fixed order, upper triangle only.
    let mut second: DMatrix<f64> = DMatrix::zeros(d, d);
    for row in samples.iter() {
        for a in 0..d {
            let xa = row[a];
            for b in a..d {
                second[(a, b)] += xa * row[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = second[(a, b)] / n as f64;
            second[(a, b)] = v;
            second[(b, a)] = v;
        }
    }

    let eig = second.symmetric_eigen();
    let evals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        evals[b]
            .partial_cmp(&evals[a])
            .expect("second-moment eigenvalues are finite")
    });

    let r = k.min(d);
    let mut basis = DMatrix::zeros(d, r);
    if d <= k {
        basis.fill_with_identity();
    } else {
        for (col, &src) in order.iter().take(r).enumerate() {
            let mut v = eig.eigenvectors.column(src).clone_owned();
            // Sign convention: largest-magnitude entry positive, so equal
            // inputs give byte-equal bases.
            let lead = v.iter().enumerate().fold((0usize, 0.0f64), |acc, (i, &x)| {
                if x.abs() > acc.1 {
                    (i, x.abs())
                } else {
                    acc
                }
            });
            if v[lead.0] < 0.0 {
                v.neg_mut();
            }
            basis.set_column(col, &v);
        }
    }

    let singular_values: Vec<f64> = order
        .iter()
        .take(d.min(n))
        .map(|&i| evals[i].max(0.0).sqrt())
        .collect();

    let mut projected = vec![0.0f64; n * r];
    for (i, row) in samples.iter().enumerate() {
        let out = &mut projected[i * r..(i + 1) * r];
        for (c, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in 0..d {
                acc += basis[(a, c)] * row[a];
            }
            *slot = acc;
        }
    }
    let projected_samples = SampleBatch::from_rows(projected, r, samples.seed);

    let projected_means_hint = true_means.map(|means| {
        means
            .iter()
            .map(|m| basis.tr_mul(m))
            .collect::<Vec<DVector<f64>>>()
    });

    Ok(ProjectionReport {
        basis,
        projected_samples,
        projected_means_hint,
        singular_values,
    })
}
