//! Newton refinement of coarse mean estimates.
//!
//! The solver variables are normalized means `x_j = mu_j / sigma_j`, held
//! internally as offsets from the normalized initializers so that every
//! quantity reaching the estimators is a difference of nearby points. The
//! target statistic comes from real samples (or, one-dimensionally, from
//! quadrature against a reference mixture), the value function and Jacobian
//! from [`crate::estimate`], and the iteration from [`numerics`].

use gmm_core::{separation_audit, Component, MixtureParams, SampleBatch, SeparationReport};
use nalgebra::{DMatrix, DVector};
use numerics::{newton_solve, OracleAccuracy, SolveConfig, SolveReport, SystemOracle, Termination};

use crate::config::RefineConfig;
use crate::error::RefineError;
use crate::estimate::{
    estimate_b, f_with_rels, fprime_with_rels, restricted_first_moment, EXACT_QUADRATURE_TOL,
};
use crate::region::{build_regions, Knowns, Region};

/// Where the refinement target comes from: a batch drawn from the unknown
/// mixture, or (for oracle experiments) the mixture itself, integrated
/// exactly. The exact source is one-dimensional.
pub enum DataSource<'a> {
    Samples(&'a SampleBatch),
    ExactMixture(&'a MixtureParams),
}

/// Result of a refinement run.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub means: Vec<DVector<f64>>,
    /// Newton trace; absent when the accuracy gate returned the
    /// initializers unchanged.
    pub report: Option<SolveReport>,
    /// Measured estimator tolerances: target, value, Jacobian.
    pub accuracy: OracleAccuracy,
    /// True when `delta` was no smaller than the basin radius and the
    /// initializers were already good enough.
    pub unchanged: bool,
    /// Basin radius in normalized units used for the neighborhood guard.
    pub basin_radius: f64,
    /// Warn-only audit of the initializers' pairwise separation.
    pub separation: SeparationReport,
    pub warnings: Vec<String>,
}

struct RegionOracle<'a> {
    regions: &'a [Region],
    knowns: &'a Knowns,
    cfg: &'a RefineConfig,
    /// `anchor_diff[j][i] = z_i - z_j`.
    anchor_diff: Vec<Vec<DVector<f64>>>,
    b: DVector<f64>,
    d: usize,
    eta1: f64,
    eta2: f64,
    eta3: f64,
    rounds: u64,
}

impl RegionOracle<'_> {
    /// Relative centers `sigma_i x_i - z_j` from offset variables:
    /// `sigma_i v_i + (z_i - z_j)`.
    fn rels(&self, v: &DVector<f64>) -> Vec<Vec<DVector<f64>>> {
        let k = self.regions.len();
        (0..k)
            .map(|j| {
                (0..k)
                    .map(|i| {
                        let mut rel = self.anchor_diff[j][i].clone();
                        for c in 0..self.d {
                            rel[c] += self.knowns.sigma(i) * v[i * self.d + c];
                        }
                        rel
                    })
                    .collect()
            })
            .collect()
    }
}

impl SystemOracle for RegionOracle<'_> {
    fn dim(&self) -> usize {
        self.regions.len() * self.d
    }

    fn target_b(&mut self) -> DVector<f64> {
        self.b.clone()
    }

    fn eval_f(&mut self, v: &DVector<f64>) -> DVector<f64> {
        let rels = self.rels(v);
        let est = f_with_rels(&rels, self.regions, self.knowns, self.cfg, self.rounds);
        self.eta2 = self.eta2.max(est.tolerance);
        est.value
    }

    fn eval_fprime(&mut self, v: &DVector<f64>) -> DMatrix<f64> {
        // Bumping first gives each Newton step its own draw index, shared
        // by the value call that follows within the step.
        self.rounds += 1;
        let rels = self.rels(v);
        let est = fprime_with_rels(&rels, self.regions, self.knowns, self.cfg, self.rounds);
        self.eta3 = self.eta3.max(est.tolerance);
        est.value
    }

    fn accuracy(&self) -> OracleAccuracy {
        OracleAccuracy {
            eta1: self.eta1,
            eta2: self.eta2,
            eta3: self.eta3,
        }
    }
}

/// Refines initializers toward the true means until the step size drops
/// below half the (dimension-adjusted) target or the budget runs out.
pub fn refine(
    source: DataSource,
    initializers: &[DVector<f64>],
    knowns: &Knowns,
    cfg: &RefineConfig,
) -> Result<RefineOutcome, RefineError> {
    let k = initializers.len();
    if k == 0 || k != knowns.k() {
        return Err(RefineError::CountMismatch(k, knowns.k()));
    }
    let d = initializers[0].len();
    if initializers.iter().any(|z| z.len() != d) {
        return Err(RefineError::DimensionMismatch);
    }
    match &source {
        DataSource::Samples(batch) if batch.dim() != d => {
            return Err(RefineError::DimensionMismatch)
        }
        DataSource::ExactMixture(mix) if mix.dim() != d => {
            return Err(RefineError::DimensionMismatch)
        }
        DataSource::ExactMixture(_) if d != 1 => {
            return Err(RefineError::QuadratureDimension(d))
        }
        _ => {}
    }
    if cfg.exact_quadrature && d != 1 {
        return Err(RefineError::QuadratureDimension(d));
    }

    // The initializers stand in for the means in the audit; weights and
    // scales are the known ones.
    let pseudo = MixtureParams::new(
        initializers
            .iter()
            .zip(knowns.weights())
            .zip(knowns.sigmas())
            .map(|((z, w), s)| Component::new(*w, z.clone(), *s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| RefineError::BadScale)?,
    )
    .map_err(|_| RefineError::BadWeights(f64::NAN))?;
    let separation = separation_audit(&pseudo, cfg.gate_c);
    let mut warnings = Vec::new();
    if !separation.all_pass {
        warnings.push(format!(
            "initializer separation below the c={} threshold; refinement may not contract",
            cfg.gate_c
        ));
    }

    let basin_radius = cfg.basin_radius(d, k);
    if cfg.delta >= basin_radius {
        return Ok(RefineOutcome {
            means: initializers.to_vec(),
            report: None,
            accuracy: OracleAccuracy::default(),
            unchanged: true,
            basin_radius,
            separation,
            warnings,
        });
    }

    let stats = pseudo.derived_stats();
    let regions = build_regions(initializers, knowns, &stats)?;

    let (b, eta1) = match &source {
        DataSource::Samples(batch) => {
            let est = estimate_b(batch, &regions, knowns)?;
            if let Some(&j) = est.empty_components.first() {
                return Err(RefineError::EmptyRegion(j));
            }
            (est.value, est.tolerance)
        }
        DataSource::ExactMixture(mix) => {
            let mut b = DVector::zeros(k);
            let mut eta = 0.0f64;
            for j in 0..k {
                let (lo, hi) = regions[j].interval();
                let z = regions[j].anchor()[0];
                let scale_j = 1.0 / (knowns.weight(j) * knowns.sigma(j));
                let mut err = 0.0;
                for comp in mix.components() {
                    let q = restricted_first_moment(
                        lo,
                        hi,
                        comp.mu[0] - z,
                        comp.sigma,
                        EXACT_QUADRATURE_TOL,
                    );
                    b[j] += scale_j * comp.w * q.value;
                    err += scale_j * comp.w * q.error_estimate;
                }
                eta = eta.max(err);
            }
            (b, eta)
        }
    };

    let anchor_diff: Vec<Vec<DVector<f64>>> = (0..k)
        .map(|j| (0..k).map(|i| &initializers[i] - &initializers[j]).collect())
        .collect();

    let mut oracle = RegionOracle {
        regions: &regions,
        knowns,
        cfg,
        anchor_diff,
        b,
        d,
        eta1,
        eta2: 0.0,
        eta3: 0.0,
        rounds: 0,
    };

    let solve_cfg = SolveConfig::new(
        cfg.planned_iterations(d),
        cfg.delta / (d as f64).sqrt(),
        basin_radius,
    )
    .require_dominant(true);
    let report = newton_solve(&mut oracle, DVector::zeros(k * d), &solve_cfg);
    let accuracy = oracle.accuracy();

    match report.termination {
        Termination::NotDominant => {
            return Err(RefineError::Dominance {
                at: report.steps(),
                report: Box::new(report),
            })
        }
        Termination::SingularJacobian => {
            return Err(RefineError::Singular {
                at: report.steps(),
                report: Box::new(report),
            })
        }
        _ => {}
    }

    let v = report.solution();
    let means: Vec<DVector<f64>> = (0..k)
        .map(|j| {
            DVector::from_fn(d, |c, _| {
                initializers[j][c] + knowns.sigma(j) * v[j * d + c]
            })
        })
        .collect();

    Ok(RefineOutcome {
        means,
        report: Some(report),
        accuracy,
        unchanged: false,
        basin_radius,
        separation,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_three() -> (MixtureParams, Vec<DVector<f64>>, Knowns) {
        let means = vec![
            DVector::from_vec(vec![-10.0]),
            DVector::from_vec(vec![0.0]),
            DVector::from_vec(vec![10.0]),
        ];
        let mix = MixtureParams::standard(means.clone()).unwrap();
        let knowns = Knowns::from_mixture(&mix);
        (mix, means, knowns)
    }

    #[test]
    fn loose_target_returns_initializers_unchanged() {
        let (mix, means, knowns) = standard_three();
        let inits: Vec<DVector<f64>> = means.iter().map(|m| m.add_scalar(0.05)).collect();
        // Basin radius is 0.5 here, so delta 0.6 skips the iteration.
        let cfg = RefineConfig::new(0.6, 1, 1, 3).with_exact_quadrature(true);
        let out = refine(DataSource::ExactMixture(&mix), &inits, &knowns, &cfg).unwrap();
        assert!(out.unchanged);
        assert!(out.report.is_none());
        assert_eq!(out.means, inits);
    }

    #[test]
    fn overlapping_components_fail_the_dominance_guard() {
        // Three components crowded into one region: each off-diagonal block
        // carries nearly a full second moment, so row sums dwarf the
        // diagonal and the solver must refuse to invert.
        let means = vec![
            DVector::from_vec(vec![0.0]),
            DVector::from_vec(vec![1.2]),
            DVector::from_vec(vec![2.4]),
        ];
        let mix = MixtureParams::standard(means.clone()).unwrap();
        let knowns = Knowns::from_mixture(&mix);
        let cfg = RefineConfig::new(1e-4, 1, 1, 3).with_exact_quadrature(true);
        match refine(DataSource::ExactMixture(&mix), &means, &knowns, &cfg) {
            Err(RefineError::Dominance { at: 0, .. }) => {}
            other => panic!("expected a dominance abort, got {other:?}"),
        }
    }

    #[test]
    fn empty_region_aborts() {
        let means = vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![40.0])];
        let mix = MixtureParams::standard(means.clone()).unwrap();
        let knowns = Knowns::from_mixture(&mix);
        let rows: Vec<f64> = (0..256).map(|i| (i % 11) as f64 * 0.05).collect();
        let batch = SampleBatch::from_rows(rows, 1, 0);
        let cfg = RefineConfig::new(1e-3, 256, 1000, 3);
        match refine(DataSource::Samples(&batch), &means, &knowns, &cfg) {
            Err(RefineError::EmptyRegion(1)) => {}
            other => panic!("expected an empty-region abort, got {other:?}"),
        }
    }

    #[test]
    fn poorly_separated_initializers_warn_but_proceed() {
        let means = vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![5.0])];
        let mix = MixtureParams::standard(means.clone()).unwrap();
        let knowns = Knowns::from_mixture(&mix);
        // Separation 5 sits between the dominance limit and the c=4 audit
        // threshold of 4 * 2 * sqrt(ln 2) = 6.66.
        let cfg = RefineConfig::new(1e-6, 1, 1, 3).with_exact_quadrature(true);
        let out = refine(DataSource::ExactMixture(&mix), &means, &knowns, &cfg).unwrap();
        assert!(!out.separation.all_pass);
        assert_eq!(out.warnings.len(), 1);
        assert!(!out.unchanged);
    }
}
