//! Permutation-minimal parameter distance between two mixtures.

use crate::assignment::min_cost_assignment;
use crate::error::MixtureError;
use crate::mixture::MixtureParams;

/// Result of matching the components of two mixtures.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Minimal total cost over all pairings.
    pub distance: f64,
    /// `permutation[j]` is the component of the second mixture paired with
    /// component `j` of the first.
    pub permutation: Vec<usize>,
}

/// Distance between mixtures with equal `k` and `d`:
///
/// ```text
/// min over pairings of sum_j  |w_j - w'_j| / min(w_j, w'_j)
///                           + (||mu_j - mu'_j|| + |sigma_j - sigma'_j|) / min(sigma_j, sigma'_j)
/// ```
///
/// The minimization is exact; the assignment solver scales to any k and is
/// cross-checked against brute force for small k.
pub fn param_distance(a: &MixtureParams, b: &MixtureParams) -> Result<Matching, MixtureError> {
    if a.k() != b.k() || a.dim() != b.dim() {
        return Err(MixtureError::Incomparable {
            k_a: a.k(),
            k_b: b.k(),
            d_a: a.dim(),
            d_b: b.dim(),
        });
    }
    let k = a.k();
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let ca = a.component(j);
            (0..k)
                .map(|l| {
                    let cb = b.component(l);
                    let dw = (ca.w - cb.w).abs() / ca.w.min(cb.w);
                    let sig_min = ca.sigma.min(cb.sigma);
                    let dmu = (&ca.mu - &cb.mu).norm() / sig_min;
                    let dsigma = (ca.sigma - cb.sigma).abs() / sig_min;
                    dw + dmu + dsigma
                })
                .collect()
        })
        .collect();
    let (distance, permutation) = min_cost_assignment(&cost);
    Ok(Matching {
        distance,
        permutation,
    })
}
