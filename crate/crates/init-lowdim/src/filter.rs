//! Approximate-local-maximum test on point estimates.
//!
//! A net point is kept when its density estimate clears a weight floor, its
//! gradient is small relative to the density, and its Hessian is strictly
//! negative definite with margin proportional to the density. Thresholds
//! depend only on summary statistics of the mixture class, never on the
//! unknown parameters themselves.

use nalgebra::DVector;

use gmm_core::DerivedStats;

use crate::estimate::{sym_max_eigenvalue, PointEstimate, PointStats};

/// Decision constants for the three acceptance conditions.
///
/// With density estimate `f`, the conditions are
/// `f >= floor`, `|grad| <= grad_coeff * f`, and
/// `lambda_max(hess) <= -hess_coeff * f`.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    pub floor: f64,
    pub grad_coeff: f64,
    pub hess_coeff: f64,
}

impl Thresholds {
    pub fn new(stats: &DerivedStats, d: usize, epsilon0: f64) -> Self {
        use std::f64::consts::PI;
        let s_max_sq = stats.sigma_max * stats.sigma_max;
        Thresholds {
            floor: stats.w_min / (2.0 * stats.sigma_max.powi(d as i32)),
            grad_coeff: PI * epsilon0 * (d as f64).sqrt() * stats.sigma_min / (4.0 * s_max_sq),
            hess_coeff: PI / (2.0 * s_max_sq),
        }
    }

    /// Evaluates the three conditions on scalar point statistics and flags
    /// estimates whose tolerance is at least half the decision margin.
    pub(crate) fn classify(&self, s: &PointStats) -> ([bool; 3], bool) {
        let passes = [
            s.density >= self.floor,
            s.gradient_norm <= self.grad_coeff * s.density,
            s.hessian_max_eigenvalue <= -self.hess_coeff * s.density,
        ];
        // Margins only matter where the density could clear the floor; a
        // point rejected even at its upper confidence bound stays rejected
        // whatever the derivative tolerances are.
        let contender = s.density + s.density_tol >= self.floor;
        let warn = contender
            && (s.density_tol >= self.floor / 2.0
                || s.gradient_tol >= self.grad_coeff * s.density / 2.0
                || s.hessian_tol >= self.hess_coeff * s.density / 2.0);
        (passes, warn)
    }
}

/// One evaluated net point with its pass/fail record.
#[derive(Debug, Clone)]
pub struct LocalMaxCandidate {
    pub point: DVector<f64>,
    pub density: f64,
    pub gradient_norm: f64,
    pub hessian_max_eigenvalue: f64,
    /// Per-condition outcomes: density floor, gradient bound, Hessian bound.
    pub passes: [bool; 3],
    /// True when an attached tolerance is large enough to flip a condition.
    pub tolerance_warning: bool,
}

impl LocalMaxCandidate {
    pub fn accepted(&self) -> bool {
        self.passes.iter().all(|&p| p)
    }
}

fn summarize(est: &PointEstimate) -> PointStats {
    PointStats {
        density: est.density,
        density_tol: est.density_tol,
        gradient_norm: est.gradient.norm(),
        gradient_tol: est.gradient_tol,
        hessian_max_eigenvalue: sym_max_eigenvalue(&est.hessian),
        hessian_tol: est.hessian_tol,
    }
}

pub(crate) fn candidate_from_stats(
    point: DVector<f64>,
    s: &PointStats,
    thresholds: &Thresholds,
) -> LocalMaxCandidate {
    let (passes, tolerance_warning) = thresholds.classify(s);
    LocalMaxCandidate {
        point,
        density: s.density,
        gradient_norm: s.gradient_norm,
        hessian_max_eigenvalue: s.hessian_max_eigenvalue,
        passes,
        tolerance_warning,
    }
}

/// Evaluates every estimate against the acceptance conditions, keeping the
/// full pass/fail record for rejected points too.
pub fn evaluate_candidates(
    estimates: &[PointEstimate],
    stats: &DerivedStats,
    epsilon0: f64,
) -> Vec<LocalMaxCandidate> {
    let d = estimates.first().map_or(1, |e| e.point.len());
    let thresholds = Thresholds::new(stats, d, epsilon0);
    estimates
        .iter()
        .map(|e| candidate_from_stats(e.point.clone(), &summarize(e), &thresholds))
        .collect()
}

/// The accepted subset of `evaluate_candidates`.
pub fn find_approx_maxima(
    estimates: &[PointEstimate],
    stats: &DerivedStats,
    epsilon0: f64,
) -> Vec<LocalMaxCandidate> {
    evaluate_candidates(estimates, stats, epsilon0)
        .into_iter()
        .filter(LocalMaxCandidate::accepted)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{exact_density_derivatives, exact_point_stats};
    use approx::assert_relative_eq;
    use gmm_core::{Component, MixtureParams};

    fn single(sigma: f64, d: usize) -> MixtureParams {
        MixtureParams::new(vec![
            Component::new(1.0, DVector::zeros(d), sigma).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn threshold_constants_for_a_known_class() {
        let mix = MixtureParams::new(vec![
            Component::new(0.3, DVector::from_vec(vec![0.0, 0.0]), 0.8).unwrap(),
            Component::new(0.7, DVector::from_vec(vec![6.0, 0.0]), 1.25).unwrap(),
        ])
        .unwrap();
        let t = Thresholds::new(&mix.derived_stats(), 2, 0.05);
        assert_relative_eq!(t.floor, 0.096, max_relative = 1e-12);
        assert_relative_eq!(t.grad_coeff, 0.028434451, max_relative = 1e-7);
        assert_relative_eq!(t.hess_coeff, 1.0053096, max_relative = 1e-7);
    }

    #[test]
    fn component_mean_is_accepted_in_exact_mode() {
        for d in 1..=3 {
            let sigma = 0.9;
            let mix = single(sigma, d);
            let stats = exact_point_stats(&mix, DVector::zeros(d).as_slice());
            let thresholds = Thresholds::new(&mix.derived_stats(), d, (-(d as f64)).exp());
            let cand = candidate_from_stats(DVector::zeros(d), &stats, &thresholds);
            assert!(cand.accepted(), "d={d} passes {:?}", cand.passes);
            assert!(!cand.tolerance_warning);
            // At the mean the Hessian is -2 pi w sigma^-(d+2) I, well below
            // the -pi/(2 sigma^2) f margin.
            let expected = -2.0 * std::f64::consts::PI * sigma.powi(-(d as i32) - 2);
            assert_relative_eq!(
                cand.hessian_max_eigenvalue,
                expected,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn far_points_fail_the_curvature_condition() {
        // Beyond sqrt(d/pi) sigma from every mean the Hessian has a
        // positive direction, so condition three must reject.
        for d in 1..=2usize {
            let mut mu2 = DVector::zeros(d);
            mu2[0] = 50.0;
            let mix = MixtureParams::new(vec![
                Component::new(0.5, DVector::zeros(d), 1.0).unwrap(),
                Component::new(0.5, mu2, 1.0).unwrap(),
            ])
            .unwrap();
            let mut x = DVector::zeros(d);
            x[0] = 1.5 * (d as f64 / std::f64::consts::PI).sqrt();
            let stats = exact_point_stats(&mix, x.as_slice());
            let thresholds = Thresholds::new(&mix.derived_stats(), d, 0.01);
            let cand = candidate_from_stats(x, &stats, &thresholds);
            assert!(!cand.passes[2], "d={d}");
            assert!(!cand.accepted());
            assert!(stats.hessian_max_eigenvalue > 0.0);
        }
    }

    #[test]
    fn annulus_points_fail_the_gradient_condition() {
        // Between eps0 sqrt(d) sigma_min and sqrt(d/pi) sigma_j the
        // gradient is too large relative to the density.
        let mix = single(1.0, 1);
        let eps0 = (-1.0f64).exp();
        let thresholds = Thresholds::new(&mix.derived_stats(), 1, eps0);
        for r in [0.40, 0.45, 0.55] {
            assert!(r > eps0 && r < (1.0 / std::f64::consts::PI).sqrt());
            let stats = exact_point_stats(&mix, &[r]);
            let cand = candidate_from_stats(DVector::from_vec(vec![r]), &stats, &thresholds);
            assert!(!cand.passes[1], "r={r}");
        }
    }

    #[test]
    fn near_mean_points_are_accepted_nonvacuously() {
        let mix = single(1.0, 1);
        let eps0 = (-1.0f64).exp();
        let thresholds = Thresholds::new(&mix.derived_stats(), 1, eps0);
        // Accept radius for condition two is eps0 sqrt(d)/8 here.
        let r = eps0 / 8.0 * 0.9;
        let stats = exact_point_stats(&mix, &[r]);
        let cand = candidate_from_stats(DVector::from_vec(vec![r]), &stats, &thresholds);
        assert!(cand.accepted(), "passes {:?}", cand.passes);
    }

    #[test]
    fn filter_keeps_only_accepted_points() {
        let mix = single(1.0, 1);
        let eps0 = (-1.0f64).exp();
        let points = [0.0, 0.02, 0.45, 2.0];
        let estimates: Vec<_> = points
            .iter()
            .map(|&r| exact_density_derivatives(&mix, &DVector::from_vec(vec![r])))
            .collect();
        let all = evaluate_candidates(&estimates, &mix.derived_stats(), eps0);
        assert_eq!(all.len(), 4);
        let kept = find_approx_maxima(&estimates, &mix.derived_stats(), eps0);
        let kept_coords: Vec<f64> = kept.iter().map(|c| c.point[0]).collect();
        assert_eq!(kept_coords, vec![0.0, 0.02]);
        assert!(kept.iter().all(|c| !c.tolerance_warning));
    }

    #[test]
    fn loose_tolerances_raise_a_warning() {
        let mix = single(1.0, 1);
        let thresholds = Thresholds::new(&mix.derived_stats(), 1, 0.1);
        let mut stats = exact_point_stats(&mix, &[0.0]);
        stats.density_tol = thresholds.floor;
        let cand = candidate_from_stats(DVector::zeros(1), &stats, &thresholds);
        assert!(cand.tolerance_warning);
        assert!(cand.accepted(), "warning does not reject");
    }
}
