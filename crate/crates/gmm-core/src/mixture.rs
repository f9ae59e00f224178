//! Mixture parameters, validation, and the JSON interchange format.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::MixtureError;

/// Tolerance on `sum(w_j) == 1` accepted at construction time.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Weight sums off by more than `WEIGHT_SUM_TOL` but within this are
/// silently renormalized; anything worse is rejected.
pub const WEIGHT_RENORM_TOL: f64 = 1e-9;

/// One spherical Gaussian component.
///
/// `sigma` is the scale parameter of the density
/// `g(x) = sigma^{-d} exp(-pi ||x - mu||^2 / sigma^2)`,
/// so the per-coordinate variance is `sigma^2 / (2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub w: f64,
    pub mu: DVector<f64>,
    pub sigma: f64,
}

impl Component {
    pub fn new(w: f64, mu: DVector<f64>, sigma: f64) -> Result<Self, MixtureError> {
        let c = Component { w, mu, sigma };
        c.validate(0)?;
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    fn validate(&self, index: usize) -> Result<(), MixtureError> {
        if !(self.w > 0.0 && self.w <= 1.0) {
            return Err(MixtureError::BadWeight { index, w: self.w });
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(MixtureError::BadSigma {
                index,
                sigma: self.sigma,
            });
        }
        if self.mu.iter().any(|v| !v.is_finite()) {
            return Err(MixtureError::BadMean { index });
        }
        Ok(())
    }
}

/// A validated mixture of `k` spherical Gaussians in `R^d`.
///
/// Construction checks every invariant (positive weights summing to one,
/// positive finite sigmas, finite means, equal dimensions), so downstream
/// code can assume a well-formed mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    components: Vec<Component>,
    d: usize,
}

impl MixtureParams {
    pub fn new(mut components: Vec<Component>) -> Result<Self, MixtureError> {
        let first = components.first().ok_or(MixtureError::Empty)?;
        let d = first.dim();
        let mut sum = 0.0;
        for (index, c) in components.iter().enumerate() {
            c.validate(index)?;
            if c.dim() != d {
                return Err(MixtureError::MixedDimensions {
                    index,
                    expected: d,
                    got: c.dim(),
                });
            }
            sum += c.w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            if (sum - 1.0).abs() > WEIGHT_RENORM_TOL {
                return Err(MixtureError::WeightSum {
                    sum,
                    tol: WEIGHT_RENORM_TOL,
                });
            }
            for c in &mut components {
                c.w /= sum;
            }
        }
        Ok(MixtureParams { components, d })
    }

    /// Equal weights `1/k`, unit sigma, the given means.
    pub fn standard(means: Vec<DVector<f64>>) -> Result<Self, MixtureError> {
        let k = means.len();
        let components = means
            .into_iter()
            .map(|mu| Component {
                w: 1.0 / k as f64,
                mu,
                sigma: 1.0,
            })
            .collect();
        Self::new(components)
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Component {
        &self.components[j]
    }

    /// True when every weight equals `1/k` and every sigma equals 1, both
    /// within `WEIGHT_SUM_TOL`.
    pub fn is_standard(&self) -> bool {
        let k = self.k() as f64;
        self.components
            .iter()
            .all(|c| (c.w - 1.0 / k).abs() <= WEIGHT_SUM_TOL && (c.sigma - 1.0).abs() <= WEIGHT_SUM_TOL)
    }

    pub fn derived_stats(&self) -> DerivedStats {
        let mut w_min = f64::INFINITY;
        let mut w_max = 0.0f64;
        let mut sigma_min = f64::INFINITY;
        let mut sigma_max = 0.0f64;
        let mut mu_norm_max = 0.0f64;
        for c in &self.components {
            w_min = w_min.min(c.w);
            w_max = w_max.max(c.w);
            sigma_min = sigma_min.min(c.sigma);
            sigma_max = sigma_max.max(c.sigma);
            mu_norm_max = mu_norm_max.max(c.mu.norm());
        }
        DerivedStats {
            w_min,
            sigma_min,
            sigma_max,
            rho: mu_norm_max.max(sigma_max).max(1.0 / sigma_min),
            rho_sigma: sigma_max / sigma_min,
            rho_w: w_max / w_min,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, MixtureError> {
        let raw: RawMixture = serde_json::from_str(s)?;
        let components = raw
            .components
            .into_iter()
            .map(|rc| Component {
                w: rc.w,
                mu: DVector::from_vec(rc.mu),
                sigma: rc.sigma,
            })
            .collect::<Vec<_>>();
        if let Some(bad) = components.iter().find(|c| c.dim() != raw.d) {
            return Err(MixtureError::DeclaredDimension {
                declared: raw.d,
                got: bad.dim(),
            });
        }
        Self::new(components)
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawMixture {
            d: self.d,
            components: self
                .components
                .iter()
                .map(|c| RawComponent {
                    w: c.w,
                    mu: c.mu.iter().copied().collect(),
                    sigma: c.sigma,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("mixture serialization cannot fail")
    }
}

/// Summary quantities derived from the parameters.
///
/// `rho` is the smallest radius for which the mixture is rho-bounded, i.e.
/// `||mu_j|| <= rho` and `1/rho <= sigma_j <= rho` for every component.
/// `rho_sigma` and `rho_w` are the sigma and weight aspect ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedStats {
    pub w_min: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rho: f64,
    pub rho_sigma: f64,
    pub rho_w: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixture {
    d: usize,
    components: Vec<RawComponent>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    w: f64,
    mu: Vec<f64>,
    sigma: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_component() -> MixtureParams {
        MixtureParams::new(vec![
            Component::new(0.5, DVector::from_vec(vec![0.0, 0.0]), 1.0).unwrap(),
            Component::new(0.5, DVector::from_vec(vec![3.0, 4.0]), 2.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_bad_weight_sum() {
        let r = MixtureParams::new(vec![
            Component::new(0.5, DVector::from_vec(vec![0.0]), 1.0).unwrap(),
            Component::new(0.4, DVector::from_vec(vec![1.0]), 1.0).unwrap(),
        ]);
        assert!(matches!(r, Err(MixtureError::WeightSum { .. })));
    }

    #[test]
    fn renormalizes_weights_within_loose_tolerance() {
        let eps = 4e-10;
        let m = MixtureParams::new(vec![
            Component::new(0.5 + eps, DVector::from_vec(vec![0.0]), 1.0).unwrap(),
            Component::new(0.5, DVector::from_vec(vec![1.0]), 1.0).unwrap(),
        ])
        .unwrap();
        let total: f64 = m.components().iter().map(|c| c.w).sum();
        assert!((total - 1.0).abs() <= WEIGHT_SUM_TOL);
        // Off by more than 1e-9 stays an error.
        let r = MixtureParams::new(vec![
            Component::new(0.5 + 3e-9, DVector::from_vec(vec![0.0]), 1.0).unwrap(),
            Component::new(0.5, DVector::from_vec(vec![1.0]), 1.0).unwrap(),
        ]);
        assert!(matches!(r, Err(MixtureError::WeightSum { .. })));
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let r = MixtureParams::new(vec![
            Component::new(0.5, DVector::from_vec(vec![0.0]), 1.0).unwrap(),
            Component::new(0.5, DVector::from_vec(vec![1.0, 2.0]), 1.0).unwrap(),
        ]);
        assert!(matches!(r, Err(MixtureError::MixedDimensions { .. })));
    }

    #[test]
    fn rejects_nonpositive_sigma_and_weight() {
        assert!(Component::new(1.0, DVector::from_vec(vec![0.0]), 0.0).is_err());
        assert!(Component::new(1.0, DVector::from_vec(vec![0.0]), -1.0).is_err());
        assert!(Component::new(0.0, DVector::from_vec(vec![0.0]), 1.0).is_err());
        assert!(Component::new(1.5, DVector::from_vec(vec![0.0]), 1.0).is_err());
        assert!(Component::new(f64::NAN, DVector::from_vec(vec![0.0]), 1.0).is_err());
    }

    #[test]
    fn rejects_nonfinite_mean() {
        assert!(Component::new(1.0, DVector::from_vec(vec![f64::INFINITY]), 1.0).is_err());
    }

    #[test]
    fn derived_stats_on_known_mixture() {
        let s = two_component().derived_stats();
        assert_eq!(s.w_min, 0.5);
        assert_eq!(s.sigma_min, 1.0);
        assert_eq!(s.sigma_max, 2.0);
        // ||(3,4)|| = 5 dominates sigma_max = 2 and 1/sigma_min = 1.
        assert_eq!(s.rho, 5.0);
        assert_eq!(s.rho_sigma, 2.0);
        assert_eq!(s.rho_w, 1.0);
    }

    #[test]
    fn rho_covers_small_sigma() {
        let m = MixtureParams::new(vec![
            Component::new(1.0, DVector::from_vec(vec![0.0]), 0.1).unwrap(),
        ])
        .unwrap();
        // 1/rho <= 0.1 forces rho >= 10.
        assert_eq!(m.derived_stats().rho, 10.0);
    }

    #[test]
    fn standard_mixture_detection() {
        let m = MixtureParams::standard(vec![
            DVector::from_vec(vec![0.0]),
            DVector::from_vec(vec![5.0]),
            DVector::from_vec(vec![-5.0]),
        ])
        .unwrap();
        assert!(m.is_standard());
        assert!(!two_component().is_standard());
    }

    #[test]
    fn json_round_trip() {
        let m = two_component();
        let s = m.to_json_string();
        let back = MixtureParams::from_json_str(&s).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn json_parses_canonical_form() {
        let m = MixtureParams::from_json_str(
            r#"{"d":2,"components":[{"w":1.0,"mu":[1.0,-2.0],"sigma":0.5}]}"#,
        )
        .unwrap();
        assert_eq!(m.k(), 1);
        assert_eq!(m.dim(), 2);
        assert_eq!(m.component(0).sigma, 0.5);
    }

    #[test]
    fn json_rejects_unknown_fields() {
        let r = MixtureParams::from_json_str(
            r#"{"d":1,"components":[{"w":1.0,"mu":[0.0],"sigma":1.0,"var":1.0}]}"#,
        );
        assert!(matches!(r, Err(MixtureError::Json(_))));
        let r = MixtureParams::from_json_str(
            r#"{"d":1,"k":1,"components":[{"w":1.0,"mu":[0.0],"sigma":1.0}]}"#,
        );
        assert!(matches!(r, Err(MixtureError::Json(_))));
    }

    #[test]
    fn json_rejects_dimension_lie() {
        let r = MixtureParams::from_json_str(
            r#"{"d":3,"components":[{"w":1.0,"mu":[0.0],"sigma":1.0}]}"#,
        );
        assert!(matches!(r, Err(MixtureError::DeclaredDimension { .. })));
    }

    #[test]
    fn json_rejects_invalid_parameters() {
        let r = MixtureParams::from_json_str(
            r#"{"d":1,"components":[{"w":1.0,"mu":[0.0],"sigma":-1.0}]}"#,
        );
        assert!(matches!(r, Err(MixtureError::BadSigma { .. })));
    }
}
