//! Pairwise mean-separation audit.
//!
//! A pair (i, j) passes when
//!
//! ```text
//! ||mu_i - mu_j|| >= c (sigma_i + sigma_j) min{ sqrt(d) + sqrt(ln(rho_w rho_sigma)),
//!                                               sqrt(ln(rho_sigma / w_min)) }
//! ```
//!
//! For a standard mixture the two branches reduce to sqrt(d) and sqrt(ln k),
//! so the audit also records which branch binds. Logs are natural.

use crate::mixture::MixtureParams;

/// Which branch of the min realizes the separation threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `sqrt(d) + sqrt(ln(rho_w rho_sigma))` is smaller.
    Dimension,
    /// `sqrt(ln(rho_sigma / w_min))` is smaller.
    MinWeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSeparation {
    pub i: usize,
    pub j: usize,
    /// `||mu_i - mu_j||`.
    pub lhs: f64,
    /// `c (sigma_i + sigma_j)` times the binding regime term.
    pub rhs: f64,
    /// Threshold using only the dimension branch.
    pub rhs_dimension: f64,
    /// Threshold using only the min-weight branch.
    pub rhs_min_weight: f64,
    pub pass: bool,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub pairs: Vec<PairSeparation>,
    pub all_pass: bool,
    /// `sqrt(d) + sqrt(ln(rho_w rho_sigma))`, shared by all pairs.
    pub dimension_term: f64,
    /// `sqrt(ln(rho_sigma / w_min))`, shared by all pairs.
    pub min_weight_term: f64,
}

/// Audits every unordered pair of components against the threshold with
/// margin constant `c`. With fewer than two components the report is empty
/// and passes vacuously.
pub fn separation_audit(mix: &MixtureParams, c: f64) -> SeparationReport {
    let stats = mix.derived_stats();
    let d = mix.dim() as f64;
    let dimension_term = d.sqrt() + (stats.rho_w * stats.rho_sigma).ln().sqrt();
    let min_weight_term = (stats.rho_sigma / stats.w_min).ln().sqrt();
    let term = dimension_term.min(min_weight_term);
    let regime = if dimension_term <= min_weight_term {
        Regime::Dimension
    } else {
        Regime::MinWeight
    };

    let mut pairs = Vec::new();
    let mut all_pass = true;
    for i in 0..mix.k() {
        for j in (i + 1)..mix.k() {
            let ci = mix.component(i);
            let cj = mix.component(j);
            let lhs = (&ci.mu - &cj.mu).norm();
            let scale = c * (ci.sigma + cj.sigma);
            let rhs = scale * term;
            let pass = lhs >= rhs;
            all_pass &= pass;
            pairs.push(PairSeparation {
                i,
                j,
                lhs,
                rhs,
                rhs_dimension: scale * dimension_term,
                rhs_min_weight: scale * min_weight_term,
                pass,
                regime,
            });
        }
    }
    SeparationReport {
        pairs,
        all_pass,
        dimension_term,
        min_weight_term,
    }
}
