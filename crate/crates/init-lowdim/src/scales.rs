//! Scale and weight recovery once candidate means are fixed.
//!
//! The width of a component follows from a two-point density ratio: with
//! `y` at distance `kappa sqrt(d) / sqrt(pi)` from the center, a single
//! component satisfies `log(f(mu)/f(y)) = kappa^2 d / sigma^2`, so
//! `sigma = kappa sqrt(d) / sqrt(log ratio)`. The weight follows from the
//! sample mass of a ball whose radius is `sqrt(d) sigma / sqrt(2 pi)`,
//! divided by the mass `c_d` a single component places in that ball.

use nalgebra::DVector;

use gmm_core::{pdf_at, MixtureParams, SampleBatch};
use numerics::quadrature::integrate;

use crate::error::InitError;
use crate::estimate::DensityOracle;
use crate::geometry::sphere_surface_area;

/// A scalar estimate with a propagated tolerance.
#[derive(Debug, Clone, Copy)]
pub struct ScaleEstimate {
    pub value: f64,
    pub tolerance: f64,
}

/// Mass a unit-scale component places in the ball of radius
/// `sqrt(d / (2 pi))` around its mean, by radial quadrature.
pub fn ball_mass_constant(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    let limit = (d as f64 / (2.0 * std::f64::consts::PI)).sqrt();
    let radial = integrate(
        |r| r.powi(d as i32 - 1) * (-std::f64::consts::PI * r * r).exp(),
        0.0,
        limit,
        1e-13,
        1e-12,
    );
    sphere_surface_area(d) * radial.value
}

/// Width of the component centered near `center`, from the density ratio
/// between the center and a probe `kappa sqrt(d) / sqrt(pi)` away along
/// the first axis.
///
/// Valid when `kappa` does not exceed the component's true width and the
/// component dominates the density at both points. A nonpositive log
/// ratio means the probe saw equal or higher density; the caller should
/// retry with a smaller `kappa`.
pub fn estimate_sigma(
    center: &DVector<f64>,
    oracle: &DensityOracle,
    kappa: f64,
) -> Result<ScaleEstimate, InitError> {
    assert!(kappa > 0.0, "kappa must be positive");
    let d = oracle.dim();
    assert_eq!(center.len(), d, "center dimension mismatch");
    let offset = kappa * (d as f64).sqrt() / std::f64::consts::PI.sqrt();
    let mut probe = center.clone();
    probe[0] += offset;

    let (f_center, tol_center) = oracle.density(center.as_slice());
    let (f_probe, tol_probe) = oracle.density(probe.as_slice());
    if !(f_center > 0.0 && f_probe > 0.0 && f_probe < f_center) {
        return Err(InitError::SigmaLogRatio {
            kappa,
            center: f_center,
            probe: f_probe,
        });
    }

    let log_ratio = (f_center / f_probe).ln();
    let value = kappa * (d as f64).sqrt() / log_ratio.sqrt();
    let log_ratio_tol = tol_center / f_center + tol_probe / f_probe;
    Ok(ScaleEstimate {
        value,
        tolerance: value * log_ratio_tol / (2.0 * log_ratio),
    })
}

/// Weight of the component at `center` from the fraction of samples in
/// the ball of radius `sqrt(d) sigma / sqrt(2 pi)`, corrected by `c_d`.
///
/// An empty ball yields value zero with a small tolerance; deciding
/// whether that is fatal is the pipeline's call.
pub fn estimate_weight(
    center: &DVector<f64>,
    sigma: f64,
    samples: &SampleBatch,
) -> ScaleEstimate {
    let d = samples.dim();
    assert_eq!(center.len(), d, "center dimension mismatch");
    assert!(sigma > 0.0, "sigma must be positive");
    let radius_sq = d as f64 * sigma * sigma / (2.0 * std::f64::consts::PI);
    let mut count = 0usize;
    for row in samples.iter() {
        let mut dist_sq = 0.0;
        for a in 0..d {
            dist_sq += (row[a] - center[a]) * (row[a] - center[a]);
        }
        if dist_sq <= radius_sq {
            count += 1;
        }
    }
    let n = samples.n() as f64;
    let frac = count as f64 / n;
    let c_d = ball_mass_constant(d);
    let se = ((frac * (1.0 - frac)).max(1.0 / n) / n).sqrt();
    ScaleEstimate {
        value: frac / c_d,
        tolerance: 3.0 * se / c_d,
    }
}

/// Weight by exact integration of the mixture density over the same ball,
/// for oracle-mode runs and as an independent check on the counting
/// estimator. Nested quadrature limits this to one and two dimensions.
pub fn exact_weight(
    mix: &MixtureParams,
    center: &DVector<f64>,
    sigma: f64,
) -> Result<ScaleEstimate, InitError> {
    let d = mix.dim();
    assert_eq!(center.len(), d, "center dimension mismatch");
    let radius = (d as f64).sqrt() * sigma / (2.0 * std::f64::consts::PI).sqrt();
    let (mass, err) = match d {
        1 => {
            let q = integrate(
                |x| pdf_at(mix, &[x]).expect("dimension checked"),
                center[0] - radius,
                center[0] + radius,
                1e-12,
                1e-11,
            );
            (q.value, q.error_estimate)
        }
        2 => {
            let q = integrate(
                |x| {
                    let half_chord = (radius * radius - x * x).max(0.0).sqrt();
                    integrate(
                        |y| pdf_at(mix, &[center[0] + x, center[1] + y]).expect("dim"),
                        -half_chord,
                        half_chord,
                        1e-12,
                        1e-10,
                    )
                    .value
                },
                -radius,
                radius,
                1e-11,
                1e-9,
            );
            (q.value, q.error_estimate)
        }
        _ => return Err(InitError::ExactWeightDimension { d }),
    };
    let c_d = ball_mass_constant(d);
    Ok(ScaleEstimate {
        value: mass / c_d,
        tolerance: err / c_d,
    })
}
