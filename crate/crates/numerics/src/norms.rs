//! Infinity-operator norm and the diagonal-dominance inverse bound.

use nalgebra::DMatrix;

/// `max_i sum_j |a_ij|`, the operator norm induced by the vector infinity
/// norm.
pub fn inf_operator_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Outcome of the dominance test on a square matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dominance {
    /// Every row satisfies `a_ii - sum_{j != i} |a_ij| >= margin > 0`; then
    /// `||A^{-1}||_{inf->inf} <= inverse_bound = 1/margin`.
    Dominant { margin: f64, inverse_bound: f64 },
    /// The margin `min_i (a_ii - sum_{j != i} |a_ij|)` is not positive, so
    /// no bound is certified.
    NotDominant { margin: f64 },
}

impl Dominance {
    pub fn margin(&self) -> f64 {
        match *self {
            Dominance::Dominant { margin, .. } => margin,
            Dominance::NotDominant { margin } => margin,
        }
    }

    pub fn inverse_bound(&self) -> Option<f64> {
        match *self {
            Dominance::Dominant { inverse_bound, .. } => Some(inverse_bound),
            Dominance::NotDominant { .. } => None,
        }
    }
}

/// Certified bound on `||A^{-1}||_{inf->inf}` for strictly diagonally
/// dominant matrices with positive diagonal: if every row has
/// `a_ii - sum_{j != i} |a_ij| >= alpha > 0`, the inverse norm is at most
/// `1/alpha`. Panics on non-square input.
pub fn varah_inverse_bound(a: &DMatrix<f64>) -> Dominance {
    assert_eq!(a.nrows(), a.ncols(), "dominance test needs a square matrix");
    let mut margin = f64::INFINITY;
    for i in 0..a.nrows() {
        let off: f64 = (0..a.ncols())
            .filter(|&j| j != i)
            .map(|j| a[(i, j)].abs())
            .sum();
        margin = margin.min(a[(i, i)] - off);
    }
    if margin > 0.0 {
        Dominance::Dominant {
            margin,
            inverse_bound: 1.0 / margin,
        }
    } else {
        Dominance::NotDominant { margin }
    }
}
