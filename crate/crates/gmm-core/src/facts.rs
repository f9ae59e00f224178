//! Closed-form Gaussian facts used as analysis yardsticks: an L1 bound on
//! weighted component differences and norm concentration thresholds.

use crate::error::MixtureError;
use crate::mixture::Component;
use std::f64::consts::PI;

/// Upper bound on `int |w1 g1 - w2 g2|`, the L1 distance between two
/// weighted spherical components, via Pinsker's inequality:
///
/// ```text
/// |w1 - w2| + min(w1, w2) ( sqrt(2 pi) ||mu1 - mu2|| / sigma2
///                         + sqrt(d |sigma1^2 - sigma2^2|) / sigma2
///                         + sqrt(2 d ln(sigma2 / sigma1)) )
/// ```
///
/// Roles are oriented so that `sigma1 <= sigma2`, which keeps the log term
/// real; the other terms do not depend on the orientation beyond that.
pub fn tv_upper_bound_pinsker(p: &Component, q: &Component) -> Result<f64, MixtureError> {
    if p.dim() != q.dim() {
        return Err(MixtureError::PointDimension {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let (a, b) = if p.sigma <= q.sigma { (p, q) } else { (q, p) };
    let d = a.dim() as f64;
    let dw = (a.w - b.w).abs();
    let wmin = a.w.min(b.w);
    let dmu = (&a.mu - &b.mu).norm();
    let mean_term = (2.0 * PI).sqrt() * dmu / b.sigma;
    let var_term = (d * (a.sigma * a.sigma - b.sigma * b.sigma).abs()).sqrt() / b.sigma;
    let log_term = (2.0 * d * (b.sigma / a.sigma).ln()).sqrt();
    Ok(dw + wmin * (mean_term + var_term + log_term))
}

/// Thresholds and bound for the squared-norm concentration of a centered
/// spherical Gaussian with scale `sigma = 1` (per-coordinate variance
/// `1/(2 pi)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormTail {
    /// `Pr[||x||^2 >= upper_threshold_sq] <= bound`.
    pub upper_threshold_sq: f64,
    /// `Pr[||x||^2 <= lower_threshold_sq] <= bound`; may be negative for
    /// large `t`, in which case the event is empty and the bound trivial.
    pub lower_threshold_sq: f64,
    pub bound: f64,
}

/// Two-sided chi-square style tail bound: for any `t > 0`,
/// `Pr[||x||^2 >= (d + 2 sqrt(d t) + 2 t)/(2 pi)] <= e^{-t}` and
/// `Pr[||x||^2 <= (d - 2 sqrt(d t))/(2 pi)] <= e^{-t}`.
pub fn gaussian_norm_tail(d: usize, t: f64) -> NormTail {
    assert!(t > 0.0, "tail parameter must be positive");
    let df = d as f64;
    NormTail {
        upper_threshold_sq: (df + 2.0 * (df * t).sqrt() + 2.0 * t) / (2.0 * PI),
        lower_threshold_sq: (df - 2.0 * (df * t).sqrt()) / (2.0 * PI),
        bound: (-t).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::MixtureParams;
    use crate::sample::sample;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn zero_for_identical_components() {
        let c = Component::new(0.7, DVector::from_vec(vec![1.0, 2.0]), 1.3).unwrap();
        assert_eq!(tv_upper_bound_pinsker(&c, &c).unwrap(), 0.0);
    }

    #[test]
    fn pure_mean_shift_value() {
        let p = Component::new(1.0, DVector::from_vec(vec![0.0]), 1.0).unwrap();
        let q = Component::new(1.0, DVector::from_vec(vec![0.1]), 1.0).unwrap();
        let b = tv_upper_bound_pinsker(&p, &q).unwrap();
        assert_relative_eq!(b, (2.0 * PI).sqrt() * 0.1, max_relative = 1e-14);
    }

    #[test]
    fn orientation_independent() {
        let p = Component::new(0.4, DVector::from_vec(vec![0.0]), 0.8).unwrap();
        let q = Component::new(0.6, DVector::from_vec(vec![0.5]), 1.4).unwrap();
        let pq = tv_upper_bound_pinsker(&p, &q).unwrap();
        let qp = tv_upper_bound_pinsker(&q, &p).unwrap();
        assert_eq!(pq, qp);
        assert!(pq.is_finite() && pq > 0.0);
    }

    #[test]
    fn bound_dominates_quadrature_l1_in_1d() {
        // Simpson quadrature of |w1 g1 - w2 g2| as an independent check that
        // the closed form really is an upper bound.
        use crate::density::component_pdf_at;
        use rand::Rng;
        for trial in 0..40u64 {
            let mut rng = crate::stream::substream(trial, "pinsker-test", &[]);
            let w1 = 0.2 + 0.8 * rng.random::<f64>();
            let w2 = 0.2 + 0.8 * rng.random::<f64>();
            let p = Component::new(
                w1,
                DVector::from_vec(vec![2.0 * rng.random::<f64>() - 1.0]),
                0.5 + rng.random::<f64>(),
            )
            .unwrap();
            let q = Component::new(
                w2,
                DVector::from_vec(vec![2.0 * rng.random::<f64>() - 1.0]),
                0.5 + rng.random::<f64>(),
            )
            .unwrap();
            let bound = tv_upper_bound_pinsker(&p, &q).unwrap();
            let r = 3.0 + 12.0 * p.sigma.max(q.sigma);
            let n = 40_000usize;
            let h = 2.0 * r / n as f64;
            let f = |x: f64| {
                (p.w * component_pdf_at(&p, &[x]) - q.w * component_pdf_at(&q, &[x])).abs()
            };
            let mut acc = f(-r) + f(r);
            for i in 1..n {
                acc += f(-r + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let l1 = acc * h / 3.0;
            assert!(
                l1 <= bound + 1e-6,
                "trial {trial}: quadrature L1 {l1} exceeds bound {bound}"
            );
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = Component::new(1.0, DVector::from_vec(vec![0.0]), 1.0).unwrap();
        let q = Component::new(1.0, DVector::from_vec(vec![0.0, 0.0]), 1.0).unwrap();
        assert!(tv_upper_bound_pinsker(&p, &q).is_err());
    }

    #[test]
    fn norm_tail_plug_in() {
        let t = gaussian_norm_tail(3, 18.0);
        assert_relative_eq!(t.bound, (-18.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(
            t.upper_threshold_sq,
            (3.0 + 2.0 * 54.0f64.sqrt() + 36.0) / (2.0 * PI),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            t.lower_threshold_sq,
            (3.0 - 2.0 * 54.0f64.sqrt()) / (2.0 * PI),
            max_relative = 1e-15
        );
    }

    #[test]
    fn bound_monotone_in_t() {
        let mut prev = f64::INFINITY;
        for i in 1..20 {
            let t = gaussian_norm_tail(5, i as f64 * 0.5);
            assert!(t.bound < prev);
            prev = t.bound;
        }
    }

    #[test]
    fn empirical_tails_within_bounds() {
        // 10^6 standard draws in d = 4; both empirical tails must respect
        // the stated bounds.
        let d = 4;
        let m = MixtureParams::new(vec![
            Component::new(1.0, DVector::zeros(d), 1.0).unwrap(),
        ])
        .unwrap();
        let batch = sample(&m, 1_000_000, 2024);
        for t in [0.5, 1.0, 2.0] {
            let tail = gaussian_norm_tail(d, t);
            let mut upper = 0usize;
            let mut lower = 0usize;
            for row in batch.iter() {
                let n2: f64 = row.iter().map(|v| v * v).sum();
                if n2 >= tail.upper_threshold_sq {
                    upper += 1;
                }
                if n2 <= tail.lower_threshold_sq {
                    lower += 1;
                }
            }
            let n = batch.n() as f64;
            assert!(
                (upper as f64) / n <= tail.bound,
                "upper tail {} vs bound {}",
                upper as f64 / n,
                tail.bound
            );
            assert!(
                (lower as f64) / n <= tail.bound,
                "lower tail {} vs bound {}",
                lower as f64 / n,
                tail.bound
            );
        }
    }
}
