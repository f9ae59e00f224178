//! End-to-end initializer: net search, acceptance filtering, clustering,
//! then scale and weight recovery.
//!
//! Net points are never materialized; chunks of grid indices are decoded,
//! evaluated, and filtered in parallel, and only accepted candidates
//! survive. Results are ordered by grid index, so the report does not
//! depend on the thread count.

use nalgebra::DVector;
use rayon::prelude::*;

use gmm_core::{separation_audit, Component, DerivedStats, MixtureParams, SampleBatch};

use crate::cluster::{cluster_spread, single_linkage_cluster};
use crate::config::NetConfig;
use crate::error::InitError;
use crate::estimate::{exact_point_stats, BallMoments, DensityOracle, PointStats, SampleCells};
use crate::filter::{candidate_from_stats, LocalMaxCandidate, Thresholds};
use crate::net::{NetGrid, MAX_DIM};
use crate::scales::{estimate_sigma, estimate_weight, exact_weight, ScaleEstimate};

/// Where the pipeline reads densities and samples from.
#[derive(Clone, Copy)]
pub enum InitSource<'a> {
    /// Everything comes from data: net filtering, widths, and weights.
    Sampled(&'a SampleBatch),
    /// Densities come from known parameters, separating algorithmic from
    /// statistical error. Width and weight estimation use `scale_samples`
    /// when given, otherwise the exact density and exact integration.
    Exact {
        mix: &'a MixtureParams,
        scale_samples: Option<&'a SampleBatch>,
    },
}

impl InitSource<'_> {
    fn dim(&self) -> usize {
        match self {
            InitSource::Sampled(batch) => batch.dim(),
            InitSource::Exact { mix, .. } => mix.dim(),
        }
    }
}

/// Initializer output: one entry per cluster, ordered by the cluster's
/// lexicographically smallest candidate point.
#[derive(Debug, Clone)]
pub struct InitReport {
    pub means: Vec<DVector<f64>>,
    pub sigmas: Vec<f64>,
    pub sigma_tolerances: Vec<f64>,
    pub weights: Vec<f64>,
    pub weight_tolerances: Vec<f64>,
    pub cluster_sizes: Vec<usize>,
    /// Net points inside the search ball.
    pub net_points: usize,
    /// Net points accepted as approximate local maxima.
    pub accepted: usize,
    pub warnings: Vec<String>,
}

const CHUNK: usize = 1 << 15;
const CANDIDATE_CAP: usize = 32_768;

struct ChunkOut {
    accepted: Vec<LocalMaxCandidate>,
    in_ball: usize,
    warned: usize,
}

fn scan_net(
    grid: &NetGrid,
    d: usize,
    thresholds: &Thresholds,
    eval: impl Fn(&[f64]) -> PointStats + Sync,
) -> (Vec<LocalMaxCandidate>, usize, usize) {
    let total = grid.total_cells();
    let n_chunks = total.div_ceil(CHUNK);
    let chunks: Vec<ChunkOut> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut out = ChunkOut {
                accepted: Vec::new(),
                in_ball: 0,
                warned: 0,
            };
            let mut buf = [0.0f64; MAX_DIM];
            for flat in c * CHUNK..((c + 1) * CHUNK).min(total) {
                if !grid.decode(flat, &mut buf) {
                    continue;
                }
                out.in_ball += 1;
                let stats = eval(&buf[..d]);
                let (passes, warn) = thresholds.classify(&stats);
                out.warned += warn as usize;
                if passes.iter().all(|&p| p) {
                    out.accepted.push(candidate_from_stats(
                        DVector::from_row_slice(&buf[..d]),
                        &stats,
                        thresholds,
                    ));
                }
            }
            out
        })
        .collect();

    let mut accepted = Vec::new();
    let mut in_ball = 0;
    let mut warned = 0;
    for c in chunks {
        accepted.extend(c.accepted);
        in_ball += c.in_ball;
        warned += c.warned;
    }
    (accepted, in_ball, warned)
}

fn cluster_diameter(points: &[DVector<f64>], members: &[usize]) -> f64 {
    let mut diameter = 0.0f64;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            diameter = diameter.max((&points[i] - &points[j]).norm());
        }
    }
    diameter
}

/// Width estimation with the ratio formula, trying one-eighth of the
/// cluster diameter first and then halving down from the class floor
/// until the propagated relative tolerance is acceptable.
///
/// The center is a net point, off the true mean by up to the covering
/// radius; that offset perturbs the log ratio by `2 pi t |offset|` against
/// a signal of `pi t^2`, so probes with `t` below `covering / epsilon0`
/// are skipped unless nothing else works.
fn sigma_with_fallback(
    center: &DVector<f64>,
    diameter: f64,
    oracle: &DensityOracle,
    sigma_min: f64,
    min_kappa: f64,
    component: usize,
) -> Result<(ScaleEstimate, bool), InitError> {
    let mut kappas = Vec::new();
    if diameter > 0.0 {
        kappas.push((diameter / 8.0).min(sigma_min));
    }
    for i in 0..20 {
        let kappa = sigma_min / f64::powi(2.0, i);
        if kappas.last() != Some(&kappa) {
            kappas.push(kappa);
        }
    }

    let mut best: Option<(ScaleEstimate, f64)> = None;
    for guard in [true, false] {
        for &kappa in &kappas {
            if guard != (kappa >= min_kappa) {
                continue;
            }
            let Ok(est) = estimate_sigma(center, oracle, kappa) else {
                continue;
            };
            if !(est.value.is_finite() && est.value > 0.0) {
                continue;
            }
            let rel = est.tolerance / est.value;
            if rel <= 0.1 {
                return Ok((est, false));
            }
            if best.as_ref().map_or(true, |(_, r)| rel < *r) {
                best = Some((est, rel));
            }
        }
        if best.is_some() {
            break;
        }
    }
    match best {
        Some((est, _)) => Ok((est, true)),
        None => Err(InitError::SigmaEstimation { component }),
    }
}

/// Runs the full initializer and reports `k` parameter triples.
///
/// `class` carries the known bounds of the mixture class (weight floor and
/// width range) that the acceptance thresholds depend on; in exact mode it
/// normally comes from the source parameters themselves.
pub fn initialize(
    source: InitSource<'_>,
    k: usize,
    cfg: &NetConfig,
    class: &DerivedStats,
) -> Result<InitReport, InitError> {
    cfg.validate()?;
    if k == 0 {
        return Err(InitError::BadConfig {
            reason: "component count must be positive".into(),
        });
    }
    let d = source.dim();
    let grid = NetGrid::new(cfg, d)?;
    let thresholds = Thresholds::new(class, d, cfg.epsilon0);
    let mut warnings = Vec::new();

    let sampled_cells = match source {
        InitSource::Sampled(batch) => Some(SampleCells::new(batch, cfg.estimation_ball_radius)),
        InitSource::Exact { .. } => None,
    };
    let (candidates, net_points, warned) = match source {
        InitSource::Exact { mix, .. } => {
            scan_net(&grid, d, &thresholds, |p| exact_point_stats(mix, p))
        }
        InitSource::Sampled(_) => {
            let cells = sampled_cells.as_ref().expect("sampled source builds cells");
            scan_net(&grid, d, &thresholds, |p| {
                BallMoments::collect(cells, p).stats()
            })
        }
    };
    if warned > 0 {
        warnings.push(format!(
            "estimate tolerances reached the decision margins at {warned} of {net_points} net points"
        ));
    }
    if candidates.len() < k {
        return Err(InitError::TooFewCandidates {
            found: candidates.len(),
            needed: k,
            candidates,
        });
    }
    if candidates.len() > CANDIDATE_CAP {
        return Err(InitError::TooManyCandidates {
            found: candidates.len(),
            cap: CANDIDATE_CAP,
        });
    }

    let points: Vec<DVector<f64>> = candidates.iter().map(|c| c.point.clone()).collect();
    let clusters = single_linkage_cluster(&points, k)?;
    if k > 1 {
        let (max_intra, min_inter) = cluster_spread(&points, &clusters);
        if max_intra >= min_inter {
            warnings.push(format!(
                "cluster diameters ({max_intra:.3e}) reach the inter-cluster gap ({min_inter:.3e})"
            ));
        }
    }

    let means: Vec<DVector<f64>> = clusters
        .iter()
        .map(|members| {
            let rep = members
                .iter()
                .copied()
                .max_by(|&i, &j| {
                    candidates[i]
                        .density
                        .partial_cmp(&candidates[j].density)
                        .expect("finite densities")
                        .then(j.cmp(&i))
                })
                .expect("clusters are nonempty");
            candidates[rep].point.clone()
        })
        .collect();

    let scale_batch = match source {
        InitSource::Sampled(batch) => Some(batch),
        InitSource::Exact { scale_samples, .. } => scale_samples,
    };
    let scale_cells = match source {
        InitSource::Exact {
            scale_samples: Some(batch),
            ..
        } => Some(SampleCells::new(batch, cfg.estimation_ball_radius)),
        _ => None,
    };
    let oracle = if let Some(cells) = sampled_cells.as_ref().or(scale_cells.as_ref()) {
        DensityOracle::Sampled(cells)
    } else if let InitSource::Exact { mix, .. } = source {
        DensityOracle::Exact(mix)
    } else {
        unreachable!("sampled source builds cells")
    };
    let min_kappa = std::f64::consts::PI.sqrt() * cfg.spacing / (2.0 * cfg.epsilon0);

    let mut sigmas = Vec::with_capacity(k);
    let mut sigma_tolerances = Vec::with_capacity(k);
    for (j, (mean, members)) in means.iter().zip(&clusters).enumerate() {
        let diameter = cluster_diameter(&points, members);
        let (est, loose) =
            sigma_with_fallback(mean, diameter, &oracle, class.sigma_min, min_kappa, j)?;
        if loose {
            warnings.push(format!(
                "width estimate for component {j} kept relative tolerance {:.2e} above the 0.1 target",
                est.tolerance / est.value
            ));
        }
        sigmas.push(est.value);
        sigma_tolerances.push(est.tolerance);
    }

    let mut weights = Vec::with_capacity(k);
    let mut weight_tolerances = Vec::with_capacity(k);
    for (j, mean) in means.iter().enumerate() {
        let est = match scale_batch {
            Some(batch) => estimate_weight(mean, sigmas[j], batch),
            None => match source {
                InitSource::Exact { mix, .. } => exact_weight(mix, mean, sigmas[j])?,
                InitSource::Sampled(_) => unreachable!("sampled source carries a batch"),
            },
        };
        if est.value <= 0.0 {
            return Err(InitError::WeightBallEmpty { component: j });
        }
        weights.push(est.value.min(1.0));
        weight_tolerances.push(est.tolerance);
    }

    // The weight estimator is only certified when the mean and width
    // errors together stay within exp(-2 c0 d) of the true width; with
    // known parameters that gate is checkable.
    if let InitSource::Exact { mix, .. } = source {
        let c0 = -cfg.epsilon0.ln() / d as f64;
        let gate = (-2.0 * c0 * d as f64).exp();
        for (j, mean) in means.iter().enumerate() {
            let nearest = mix
                .components()
                .iter()
                .min_by(|a, b| {
                    (mean - &a.mu).norm().partial_cmp(&(mean - &b.mu).norm()).unwrap()
                })
                .expect("nonempty mixture");
            let err = (mean - &nearest.mu).norm() + (sigmas[j] - nearest.sigma).abs();
            if err > gate * nearest.sigma {
                warnings.push(format!(
                    "component {j} scale error {err:.3e} exceeds the weight-estimator gate {:.3e}",
                    gate * nearest.sigma
                ));
            }
        }
    }

    let audit_mix = match source {
        InitSource::Exact { mix, .. } => Some(mix.clone()),
        InitSource::Sampled(_) => {
            let total: f64 = weights.iter().sum();
            let comps: Result<Vec<_>, _> = means
                .iter()
                .zip(&sigmas)
                .zip(&weights)
                .map(|((mu, &sigma), &w)| Component::new(w / total, mu.clone(), sigma))
                .collect();
            comps.ok().and_then(|c| MixtureParams::new(c).ok())
        }
    };
    match audit_mix {
        Some(mix) if k > 1 => {
            let c0 = -cfg.epsilon0.ln() / d as f64;
            let audit = separation_audit(&mix, 4.0 * c0);
            let failing: Vec<String> = audit
                .pairs
                .iter()
                .filter(|p| p.lhs < p.rhs_dimension)
                .map(|p| format!("({},{})", p.i, p.j))
                .collect();
            if !failing.is_empty() {
                warnings.push(format!(
                    "separation below the dimension-branch guarantee for pairs {}",
                    failing.join(" ")
                ));
            }
        }
        Some(_) => {}
        None => warnings.push(
            "estimated parameters do not form a valid mixture; separation audit skipped".into(),
        ),
    }

    Ok(InitReport {
        means,
        sigmas,
        sigma_tolerances,
        weights,
        weight_tolerances,
        cluster_sizes: clusters.iter().map(Vec::len).collect(),
        net_points,
        accepted: candidates.len(),
        warnings,
    })
}
