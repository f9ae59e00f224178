//! Sample-capture regions around initializers.
//!
//! The region of component `j` is the intersection of an l2 ball around the
//! initializer `z_j` with one slab per other component, each slab oriented
//! along the unit vector from `z_j` toward `z_l`:
//!
//! ```text
//! S_j = { y : ||y - z_j|| <= R_j  and  |<y - z_j, e_jl>| <= H_j  for all l != j }
//! R_j = 4 (sqrt(d) + sqrt(ln(rho_sigma rho_w))) sigma_j
//! H_j = 4 sqrt(ln(rho_sigma / w_min)) sigma_j
//! ```
//!
//! Restricted means over these regions stay informative about component `j`
//! alone: the ball keeps essentially all of component `j`'s mass while the
//! slabs cut away the directions where neighbors could leak in.

use gmm_core::{DerivedStats, MixtureParams};
use nalgebra::DVector;

use crate::error::RefineError;

/// Per-component weights and scales treated as known while means are
/// refined.
#[derive(Debug, Clone, PartialEq)]
pub struct Knowns {
    weights: Vec<f64>,
    sigmas: Vec<f64>,
}

impl Knowns {
    /// Validates positivity and renormalizes weights whose sum is within
    /// 1e-9 of one, mirroring the mixture constructor.
    pub fn new(mut weights: Vec<f64>, sigmas: Vec<f64>) -> Result<Self, RefineError> {
        if weights.is_empty() || weights.len() != sigmas.len() {
            return Err(RefineError::CountMismatch(weights.len(), sigmas.len()));
        }
        if !weights.iter().all(|w| w.is_finite() && *w > 0.0) {
            return Err(RefineError::BadWeights(f64::NAN));
        }
        if !sigmas.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(RefineError::BadScale);
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > gmm_core::WEIGHT_RENORM_TOL {
            return Err(RefineError::BadWeights(sum - 1.0));
        }
        if (sum - 1.0).abs() > gmm_core::WEIGHT_SUM_TOL {
            for w in &mut weights {
                *w /= sum;
            }
        }
        Ok(Knowns { weights, sigmas })
    }

    pub fn from_mixture(mix: &MixtureParams) -> Self {
        Knowns {
            weights: mix.components().iter().map(|c| c.w).collect(),
            sigmas: mix.components().iter().map(|c| c.sigma).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn sigma(&self, j: usize) -> f64 {
        self.sigmas[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }
}

/// Slab-and-ball capture region anchored at one initializer.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    anchor: DVector<f64>,
    slab_directions: Vec<DVector<f64>>,
    slab_halfwidth: f64,
    ball_radius: f64,
}

impl Region {
    pub fn new(
        anchor: DVector<f64>,
        slab_directions: Vec<DVector<f64>>,
        slab_halfwidth: f64,
        ball_radius: f64,
    ) -> Result<Self, RefineError> {
        for e in &slab_directions {
            if e.len() != anchor.len() || (e.norm() - 1.0).abs() > 1e-12 {
                return Err(RefineError::BadDirection);
            }
        }
        if !(ball_radius > 0.0) || (!slab_directions.is_empty() && !(slab_halfwidth > 0.0)) {
            return Err(RefineError::BadExtent);
        }
        Ok(Region {
            anchor,
            slab_directions,
            slab_halfwidth,
            ball_radius,
        })
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn slab_directions(&self) -> &[DVector<f64>] {
        &self.slab_directions
    }

    pub fn slab_halfwidth(&self) -> f64 {
        self.slab_halfwidth
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    /// Test hook: same region with the ball widened or shrunk. An infinite
    /// radius turns the region into the plain slab intersection.
    pub fn with_ball_radius(mut self, ball_radius: f64) -> Self {
        assert!(ball_radius > 0.0, "radius must stay positive");
        self.ball_radius = ball_radius;
        self
    }

    /// Membership test with inclusive boundaries.
    pub fn contains(&self, y: &DVector<f64>) -> bool {
        assert_eq!(y.len(), self.anchor.len(), "point dimension mismatch");
        self.contains_point(y.as_slice())
    }

    /// Slice flavor of [`Region::contains`], convenient over sample rows.
    pub fn contains_point(&self, y: &[f64]) -> bool {
        assert_eq!(y.len(), self.anchor.len(), "point dimension mismatch");
        let mut norm_sq = 0.0;
        for (c, z) in y.iter().zip(self.anchor.iter()) {
            let u = c - z;
            norm_sq += u * u;
        }
        if norm_sq > self.ball_radius * self.ball_radius {
            return false;
        }
        for e in &self.slab_directions {
            let mut dot = 0.0;
            for ((c, z), ec) in y.iter().zip(self.anchor.iter()).zip(e.iter()) {
                dot += (c - z) * ec;
            }
            if dot.abs() > self.slab_halfwidth {
                return false;
            }
        }
        true
    }

    /// Membership for an offset `u = y - z_j`, avoiding the subtraction.
    pub(crate) fn contains_offset(&self, u: &[f64]) -> bool {
        let norm_sq: f64 = u.iter().map(|c| c * c).sum();
        if norm_sq > self.ball_radius * self.ball_radius {
            return false;
        }
        for e in &self.slab_directions {
            let dot: f64 = u.iter().zip(e.iter()).map(|(c, ec)| c * ec).sum();
            if dot.abs() > self.slab_halfwidth {
                return false;
            }
        }
        true
    }

    /// One-dimensional regions are intervals; returns the endpoints as
    /// offsets from the anchor. May be inverted (empty) for degenerate
    /// extents.
    pub fn interval(&self) -> (f64, f64) {
        assert_eq!(self.anchor.len(), 1, "interval view needs dimension 1");
        let mut lo = -self.ball_radius;
        let mut hi = self.ball_radius;
        // Each direction is +-1 after normalization, so every slab clips to
        // the same symmetric window.
        if !self.slab_directions.is_empty() {
            lo = lo.max(-self.slab_halfwidth);
            hi = hi.min(self.slab_halfwidth);
        }
        (lo, hi)
    }
}

/// Builds one region per initializer. Directions point from each anchor to
/// every other; halfwidth and radius scale with the component's sigma and
/// the mixture aspect ratios.
pub fn build_regions(
    initializers: &[DVector<f64>],
    knowns: &Knowns,
    stats: &DerivedStats,
) -> Result<Vec<Region>, RefineError> {
    let k = initializers.len();
    if k == 0 || k != knowns.k() {
        return Err(RefineError::CountMismatch(k, knowns.k()));
    }
    let d = initializers[0].len();
    if initializers.iter().any(|z| z.len() != d) {
        return Err(RefineError::DimensionMismatch);
    }
    let dim_term = (d as f64).sqrt() + (stats.rho_sigma * stats.rho_w).ln().sqrt();
    let weight_term = (stats.rho_sigma / stats.w_min).ln().sqrt();

    let mut regions = Vec::with_capacity(k);
    for j in 0..k {
        let mut dirs = Vec::with_capacity(k - 1);
        for l in 0..k {
            if l == j {
                continue;
            }
            let diff = &initializers[l] - &initializers[j];
            let norm = diff.norm();
            if norm == 0.0 {
                return Err(RefineError::CoincidentInitializers(j.min(l), j.max(l)));
            }
            dirs.push(diff / norm);
        }
        regions.push(Region::new(
            initializers[j].clone(),
            dirs,
            4.0 * weight_term * knowns.sigma(j),
            4.0 * dim_term * knowns.sigma(j),
        )?);
    }
    Ok(regions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use gmm_core::Component;

    fn stats_of(weights: &[f64], sigmas: &[f64]) -> DerivedStats {
        let d = 1;
        let comps = weights
            .iter()
            .zip(sigmas)
            .map(|(w, s)| Component::new(*w, DVector::zeros(d), *s).unwrap())
            .collect();
        // Means do not enter the region extents, so placeholder zeros are
        // fine here even though they collide.
        MixtureParams::new(comps).unwrap().derived_stats()
    }

    #[test]
    fn single_component_region_is_a_ball() {
        let knowns = Knowns::new(vec![1.0], vec![2.0]).unwrap();
        let stats = stats_of(&[1.0], &[2.0]);
        let z = DVector::from_vec(vec![3.0, -1.0]);
        let regions = build_regions(&[z.clone()], &knowns, &stats).unwrap();
        assert_eq!(regions.len(), 1);
        let r = &regions[0];
        assert!(r.slab_directions().is_empty());
        // sqrt(2) from the dimension, no aspect-ratio term, sigma 2.
        assert_relative_eq!(r.ball_radius(), 4.0 * 2.0f64.sqrt() * 2.0, max_relative = 1e-15);
        assert!(r.contains(&z));
    }

    #[test]
    fn two_component_extents_match_hand_values() {
        let knowns = Knowns::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let stats = stats_of(&[0.5, 0.5], &[1.0, 1.0]);
        let z = [DVector::from_vec(vec![0.0]), DVector::from_vec(vec![10.0])];
        let regions = build_regions(&z, &knowns, &stats).unwrap();
        let r0 = &regions[0];
        assert_eq!(r0.slab_directions().len(), 1);
        assert_eq!(r0.slab_directions()[0][0], 1.0);
        assert_relative_eq!(r0.slab_halfwidth(), 4.0 * 2.0f64.ln().sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r0.ball_radius(), 4.0, max_relative = 1e-15);
        let (lo, hi) = r0.interval();
        assert_relative_eq!(lo, -4.0 * 2.0f64.ln().sqrt(), max_relative = 1e-15);
        assert_eq!(hi, -lo);
    }

    #[test]
    fn directions_are_antisymmetric() {
        let knowns = Knowns::new(vec![0.25; 4], vec![1.0, 2.0, 0.5, 1.0]).unwrap();
        let stats = stats_of(&[0.25; 4], &[1.0, 2.0, 0.5, 1.0]);
        let z: Vec<DVector<f64>> = vec![
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
            DVector::from_vec(vec![4.0, -2.0, 1.0]),
            DVector::from_vec(vec![-3.0, 5.0, 0.25]),
            DVector::from_vec(vec![1.5, 1.5, -8.0]),
        ];
        let regions = build_regions(&z, &knowns, &stats).unwrap();
        for j in 0..4 {
            for l in 0..4 {
                if l == j {
                    continue;
                }
                // Direction toward l sits at slot l minus the skipped self.
                let slot = |from: usize, to: usize| if to < from { to } else { to - 1 };
                let e_jl = &regions[j].slab_directions()[slot(j, l)];
                let e_lj = &regions[l].slab_directions()[slot(l, j)];
                assert_eq!(*e_jl, -e_lj);
                assert_relative_eq!(e_jl.norm(), 1.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn coincident_initializers_are_rejected() {
        let knowns = Knowns::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let stats = stats_of(&[0.5, 0.5], &[1.0, 1.0]);
        let z = [DVector::from_vec(vec![2.0]), DVector::from_vec(vec![2.0])];
        match build_regions(&z, &knowns, &stats) {
            Err(RefineError::CoincidentInitializers(0, 1)) => {}
            other => panic!("expected coincidence rejection, got {other:?}"),
        }
    }

    #[test]
    fn membership_checks_ball_and_slabs() {
        let knowns = Knowns::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let stats = stats_of(&[0.5, 0.5], &[1.0, 1.0]);
        let z = [
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![10.0, 0.0]),
        ];
        let regions = build_regions(&z, &knowns, &stats).unwrap();
        let r0 = &regions[0];
        let h = r0.slab_halfwidth();
        assert!(r0.contains(&z[0]));
        // Inside the ball but past the slab toward the neighbor.
        assert!(r0.ball_radius() > 4.0);
        assert!(!r0.contains(&DVector::from_vec(vec![4.0, 0.0])));
        // Orthogonal to the slab, inside the ball.
        assert!(r0.contains(&DVector::from_vec(vec![0.0, 5.0])));
        // Slab boundary is inclusive.
        assert!(r0.contains(&DVector::from_vec(vec![h, 0.0])));
        // Past the ball in any direction.
        let far = DVector::from_vec(vec![0.0, r0.ball_radius() + 1e-9]);
        assert!(!r0.contains(&far));
    }

    #[test]
    fn infinite_ball_hook_keeps_slabs() {
        let knowns = Knowns::new(vec![1.0], vec![1.0]).unwrap();
        let stats = stats_of(&[1.0], &[1.0]);
        let z = [DVector::from_vec(vec![0.0])];
        let r = build_regions(&z, &knowns, &stats).unwrap()[0]
            .clone()
            .with_ball_radius(f64::INFINITY);
        assert!(r.contains(&DVector::from_vec(vec![1e12])));
        let (lo, hi) = r.interval();
        assert_eq!(lo, f64::NEG_INFINITY);
        assert_eq!(hi, f64::INFINITY);
    }

    #[test]
    fn knowns_renormalize_or_reject() {
        let k = Knowns::new(vec![0.5 + 3e-10, 0.5], vec![1.0, 1.0]).unwrap();
        assert!((k.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Knowns::new(vec![0.6, 0.5], vec![1.0, 1.0]).is_err());
        assert!(Knowns::new(vec![0.5, 0.5], vec![1.0, -1.0]).is_err());
        assert!(Knowns::new(vec![0.5, 0.5], vec![1.0]).is_err());
    }
}
