//! Density, gradient, and Hessian estimates at net points.
//!
//! The sampled path follows the histogram idea: around each query point,
//! count samples in a small ball and turn the ball's first and second
//! offset moments into derivative estimates. For a ball of radius `r` in
//! `d` dimensions with volume `V`,
//!
//! ```text
//! E[ count/N ]            ~ V f(y)
//! E[ (1/N) sum I u      ] ~ (V r^2 / (d+2)) f'(y)
//! E[ (1/N) sum I u u^T  ] ~ (V r^2 / (d+2)) f(y) I
//!                           + (V r^4 / ((d+2)(d+4))) (tr(H) I + 2 H) / 2
//! ```
//!
//! with `u = x - y` the in-ball offsets and `H = f''(y)`. Inverting the
//! second-moment identity gives `H = D + (tr(D)/2) I` where
//! `D = ((d+2)(d+4)/(V r^4)) [ M2 - (r^2/(d+2)) (count/N) I ]`.
//! Every estimate carries a three-sigma plug-in tolerance; the `O(r^2)`
//! smoothing bias is the caller's to budget via the ball radius.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use gmm_core::{grad_pdf_at, hess_pdf_at, pdf_at, MixtureParams, SampleBatch};

use crate::config::NetConfig;
use crate::geometry::ball_volume;
use crate::net::MAX_DIM;

const TRI: usize = MAX_DIM * (MAX_DIM + 1) / 2;

fn tri(d: usize, a: usize, b: usize) -> usize {
    debug_assert!(a <= b && b < d);
    a * (2 * d - a + 1) / 2 + (b - a)
}

/// Density and derivative estimates at one point, each with a three-sigma
/// tolerance. Tolerances carry variance floors of one count, so an empty
/// ball reports zero estimates with small finite tolerances rather than
/// certainty.
#[derive(Debug, Clone)]
pub struct PointEstimate {
    pub point: DVector<f64>,
    pub density: f64,
    pub density_tol: f64,
    pub gradient: DVector<f64>,
    /// Euclidean-norm bound on the gradient error.
    pub gradient_tol: f64,
    pub hessian: DMatrix<f64>,
    /// Operator-norm bound on the Hessian error (Frobenius combination of
    /// entrywise bounds).
    pub hessian_tol: f64,
    pub in_ball: usize,
}

/// Samples bucketed into axis-aligned cells whose edge equals the
/// estimation ball radius, so a ball query touches at most `3^d` cells.
pub struct SampleCells<'a> {
    batch: &'a SampleBatch,
    ball_radius: f64,
    cells: HashMap<[i32; MAX_DIM], Vec<u32>>,
}

fn cell_key(point: &[f64], edge: f64) -> [i32; MAX_DIM] {
    let mut key = [0i32; MAX_DIM];
    for (k, x) in key.iter_mut().zip(point) {
        *k = (x / edge).floor() as i32;
    }
    key
}

impl<'a> SampleCells<'a> {
    pub fn new(batch: &'a SampleBatch, ball_radius: f64) -> Self {
        assert!(ball_radius > 0.0, "ball radius must be positive");
        assert!(
            batch.dim() <= MAX_DIM,
            "the net initializer handles d <= {MAX_DIM}"
        );
        let mut cells: HashMap<[i32; MAX_DIM], Vec<u32>> = HashMap::new();
        for (i, row) in batch.iter().enumerate() {
            cells
                .entry(cell_key(row, ball_radius))
                .or_default()
                .push(i as u32);
        }
        SampleCells {
            batch,
            ball_radius,
            cells,
        }
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn n(&self) -> usize {
        self.batch.n()
    }

    pub fn dim(&self) -> usize {
        self.batch.dim()
    }

    /// Applies `body` to the in-ball offset of every sample within
    /// `ball_radius` of `y`, in ascending sample order per cell with cells
    /// visited in odometer order, so accumulation is deterministic.
    fn for_each_in_ball<F: FnMut(&[f64])>(&self, y: &[f64], mut body: F) {
        let d = self.batch.dim();
        let edge = self.ball_radius;
        let r_sq = edge * edge;
        let mut lo = [0i32; MAX_DIM];
        let mut hi = [0i32; MAX_DIM];
        for a in 0..d {
            lo[a] = ((y[a] - edge) / edge).floor() as i32;
            hi[a] = ((y[a] + edge) / edge).floor() as i32;
        }
        let mut idx = lo;
        let mut u = [0.0; MAX_DIM];
        loop {
            if let Some(members) = self.cells.get(&idx) {
                for &m in members {
                    let row = self.batch.point(m as usize);
                    let mut norm_sq = 0.0;
                    for a in 0..d {
                        u[a] = row[a] - y[a];
                        norm_sq += u[a] * u[a];
                    }
                    if norm_sq <= r_sq {
                        body(&u[..d]);
                    }
                }
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    return;
                }
                idx[axis] += 1;
                if idx[axis] <= hi[axis] {
                    break;
                }
                idx[axis] = lo[axis];
                axis += 1;
            }
        }
    }

    pub(crate) fn count_in_ball(&self, y: &[f64]) -> usize {
        let mut count = 0usize;
        self.for_each_in_ball(y, |_| count += 1);
        count
    }
}

/// Raw in-ball moment sums; `render` turns them into estimates.
#[derive(Debug, Clone)]
pub(crate) struct BallMoments {
    d: usize,
    radius: f64,
    n_total: usize,
    count: u64,
    m1: [f64; MAX_DIM],
    s2: [f64; MAX_DIM],
    m2: [f64; TRI],
    q: [f64; TRI],
}

impl BallMoments {
    pub(crate) fn collect(cells: &SampleCells, y: &[f64]) -> Self {
        let d = cells.dim();
        let radius = cells.ball_radius;
        let bias = radius * radius / (d as f64 + 2.0);
        let mut out = BallMoments {
            d,
            radius,
            n_total: cells.n(),
            count: 0,
            m1: [0.0; MAX_DIM],
            s2: [0.0; MAX_DIM],
            m2: [0.0; TRI],
            q: [0.0; TRI],
        };
        cells.for_each_in_ball(y, |u| {
            out.count += 1;
            for a in 0..d {
                out.m1[a] += u[a];
                out.s2[a] += u[a] * u[a];
            }
            for a in 0..d {
                for b in a..d {
                    let prod = u[a] * u[b];
                    let centered = if a == b { prod - bias } else { prod };
                    let t = tri(d, a, b);
                    out.m2[t] += prod;
                    out.q[t] += centered * centered;
                }
            }
        });
        out
    }

    /// Density estimate with its three-sigma tolerance.
    fn density(&self) -> (f64, f64) {
        let n = self.n_total as f64;
        let v = ball_volume(self.d, self.radius);
        let frac = self.count as f64 / n;
        let var = (frac * (1.0 - frac)).max(1.0 / n);
        (frac / v, 3.0 * (var / n).sqrt() / v)
    }

    pub(crate) fn render(&self, point: DVector<f64>) -> PointEstimate {
        let d = self.d;
        let n = self.n_total as f64;
        let r = self.radius;
        let v = ball_volume(d, r);
        let (density, density_tol) = self.density();
        let grad_scale = (d as f64 + 2.0) / (v * r * r);
        let mut gradient = DVector::zeros(d);
        let mut grad_var_sum = 0.0;
        for a in 0..d {
            let mean = self.m1[a] / n;
            gradient[a] = grad_scale * mean;
            let var = (self.s2[a] / n - mean * mean).max(r * r / n);
            grad_var_sum += var / n;
        }
        let gradient_tol = 3.0 * grad_scale * grad_var_sum.sqrt();

        let hess_scale = (d as f64 + 2.0) * (d as f64 + 4.0) / (v * r.powi(4));
        let bias = r * r / (d as f64 + 2.0) * self.count as f64;
        let mut scaled = DMatrix::zeros(d, d);
        let mut entry_tol = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in a..d {
                let t = tri(d, a, b);
                let centered_sum = if a == b {
                    self.m2[t] - bias
                } else {
                    self.m2[t]
                };
                let mean = centered_sum / n;
                let var = (self.q[t] / n - mean * mean).max(r.powi(4) / n);
                let tol = 3.0 * hess_scale * (var / n).sqrt();
                scaled[(a, b)] = hess_scale * mean;
                scaled[(b, a)] = scaled[(a, b)];
                entry_tol[(a, b)] = tol;
                entry_tol[(b, a)] = tol;
            }
        }
        let trace_half = scaled.trace() / 2.0;
        let trace_tol_half: f64 = (0..d).map(|a| entry_tol[(a, a)]).sum::<f64>() / 2.0;
        let mut hessian = scaled;
        let mut frob_sq = 0.0;
        for a in 0..d {
            hessian[(a, a)] += trace_half;
            entry_tol[(a, a)] += trace_tol_half;
        }
        for a in 0..d {
            for b in 0..d {
                frob_sq += entry_tol[(a, b)] * entry_tol[(a, b)];
            }
        }

        PointEstimate {
            point,
            density,
            density_tol,
            gradient,
            gradient_tol,
            hessian,
            hessian_tol: frob_sq.sqrt(),
            in_ball: self.count as usize,
        }
    }

    /// Condensed form of `render` for the streaming filter: scalar summary
    /// statistics only, no vectors or matrices.
    pub(crate) fn stats(&self) -> PointStats {
        let (density, density_tol) = self.density();
        let est = self.render(DVector::zeros(self.d));
        PointStats {
            density,
            density_tol,
            gradient_norm: est.gradient.norm(),
            gradient_tol: est.gradient_tol,
            hessian_max_eigenvalue: sym_max_eigenvalue(&est.hessian),
            hessian_tol: est.hessian_tol,
        }
    }
}

/// Scalar summary of one point's estimates, enough to test the acceptance
/// conditions without holding the full gradient and Hessian.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointStats {
    pub density: f64,
    pub density_tol: f64,
    pub gradient_norm: f64,
    pub gradient_tol: f64,
    pub hessian_max_eigenvalue: f64,
    pub hessian_tol: f64,
}

/// Largest eigenvalue of a symmetric matrix, with closed forms in one and
/// two dimensions for the streaming hot path.
pub(crate) fn sym_max_eigenvalue(h: &DMatrix<f64>) -> f64 {
    match h.nrows() {
        1 => h[(0, 0)],
        2 => {
            let half_sum = (h[(0, 0)] + h[(1, 1)]) / 2.0;
            let half_diff = (h[(0, 0)] - h[(1, 1)]) / 2.0;
            half_sum + (half_diff * half_diff + h[(0, 1)] * h[(0, 1)]).sqrt()
        }
        _ => h
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::NEG_INFINITY, |m, &e| m.max(e)),
    }
}

/// Ball-moment estimates of `(f, f', f'')` at each query point. Output
/// order matches `points`; work is parallel across points.
pub fn estimate_density_derivatives(
    samples: &SampleBatch,
    points: &[DVector<f64>],
    cfg: &NetConfig,
) -> Vec<PointEstimate> {
    let cells = SampleCells::new(samples, cfg.estimation_ball_radius);
    points
        .par_iter()
        .map(|p| {
            assert_eq!(p.len(), samples.dim(), "point dimension mismatch");
            BallMoments::collect(&cells, p.as_slice()).render(p.clone())
        })
        .collect()
}

/// Closed-form `(f, f', f'')` from known mixture parameters, with zero
/// tolerances. The test configuration that isolates algorithmic error from
/// statistical error.
pub fn exact_density_derivatives(mix: &MixtureParams, point: &DVector<f64>) -> PointEstimate {
    let x = point.as_slice();
    PointEstimate {
        point: point.clone(),
        density: pdf_at(mix, x).expect("dimension checked by caller"),
        density_tol: 0.0,
        gradient: grad_pdf_at(mix, x).expect("dimension checked by caller"),
        gradient_tol: 0.0,
        hessian: hess_pdf_at(mix, x).expect("dimension checked by caller"),
        hessian_tol: 0.0,
        in_ball: 0,
    }
}

/// Fused single-pass evaluation of the exact summary statistics, one
/// exponential per component and no heap traffic for d <= 2.
pub(crate) fn exact_point_stats(mix: &MixtureParams, y: &[f64]) -> PointStats {
    use std::f64::consts::PI;
    let d = mix.dim();
    let mut f = 0.0;
    let mut grad = [0.0; MAX_DIM];
    let mut hess = [0.0; TRI];
    for c in mix.components() {
        let s2 = c.sigma * c.sigma;
        let mut r2 = 0.0;
        for a in 0..d {
            r2 += (y[a] - c.mu[a]) * (y[a] - c.mu[a]);
        }
        let g = c.w * c.sigma.powi(-(d as i32)) * (-PI * r2 / s2).exp();
        f += g;
        let lin = -2.0 * PI / s2 * g;
        let quad = 4.0 * PI * PI / (s2 * s2) * g;
        for a in 0..d {
            grad[a] += lin * (y[a] - c.mu[a]);
            for b in a..d {
                let t = tri(d, a, b);
                hess[t] += quad * (y[a] - c.mu[a]) * (y[b] - c.mu[b]);
                if a == b {
                    hess[t] += lin;
                }
            }
        }
    }
    let gradient_norm = grad[..d].iter().map(|g| g * g).sum::<f64>().sqrt();
    let hessian_max_eigenvalue = match d {
        1 => hess[0],
        2 => {
            let half_sum = (hess[0] + hess[2]) / 2.0;
            let half_diff = (hess[0] - hess[2]) / 2.0;
            half_sum + (half_diff * half_diff + hess[1] * hess[1]).sqrt()
        }
        _ => {
            let mut m = DMatrix::zeros(d, d);
            for a in 0..d {
                for b in a..d {
                    m[(a, b)] = hess[tri(d, a, b)];
                    m[(b, a)] = m[(a, b)];
                }
            }
            sym_max_eigenvalue(&m)
        }
    };
    PointStats {
        density: f,
        density_tol: 0.0,
        gradient_norm,
        gradient_tol: 0.0,
        hessian_max_eigenvalue,
        hessian_tol: 0.0,
    }
}

/// Pointwise density source for the scale estimators: exact parameters or
/// ball counts over a sample batch.
pub enum DensityOracle<'a> {
    Exact(&'a MixtureParams),
    Sampled(&'a SampleCells<'a>),
}

impl DensityOracle<'_> {
    pub fn dim(&self) -> usize {
        match self {
            DensityOracle::Exact(mix) => mix.dim(),
            DensityOracle::Sampled(cells) => cells.dim(),
        }
    }

    /// Density value and its three-sigma tolerance at `y`.
    pub fn density(&self, y: &[f64]) -> (f64, f64) {
        match self {
            DensityOracle::Exact(mix) => (pdf_at(mix, y).expect("dimension mismatch"), 0.0),
            DensityOracle::Sampled(cells) => {
                let n = cells.n() as f64;
                let v = ball_volume(cells.dim(), cells.ball_radius);
                let frac = cells.count_in_ball(y) as f64 / n;
                let var = (frac * (1.0 - frac)).max(1.0 / n);
                (frac / v, 3.0 * (var / n).sqrt() / v)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use gmm_core::{sample, Component};

    fn single(sigma: f64, d: usize) -> MixtureParams {
        MixtureParams::new(vec![
            Component::new(1.0, DVector::zeros(d), sigma).unwrap(),
        ])
        .unwrap()
    }

    fn cfg(ball: f64) -> NetConfig {
        NetConfig {
            radius: 1.0,
            spacing: 0.5,
            estimation_ball_radius: ball,
            density_accuracy: 1e-3,
            epsilon0: 0.1,
            max_points: 1e8,
        }
    }

    #[test]
    fn exact_estimates_reproduce_the_closed_forms() {
        let mix = MixtureParams::new(vec![
            Component::new(0.4, DVector::from_vec(vec![0.0, 1.0]), 0.9).unwrap(),
            Component::new(0.6, DVector::from_vec(vec![3.0, -2.0]), 1.2).unwrap(),
        ])
        .unwrap();
        let p = DVector::from_vec(vec![0.3, 0.8]);
        let est = exact_density_derivatives(&mix, &p);
        assert_eq!(est.density, pdf_at(&mix, p.as_slice()).unwrap());
        assert_eq!(est.gradient, grad_pdf_at(&mix, p.as_slice()).unwrap());
        assert_eq!(est.hessian, hess_pdf_at(&mix, p.as_slice()).unwrap());
        assert_eq!(est.density_tol, 0.0);
        assert_eq!(est.gradient_tol, 0.0);
        assert_eq!(est.hessian_tol, 0.0);
    }

    #[test]
    fn fused_statistics_match_the_reference_evaluators() {
        let mix = MixtureParams::new(vec![
            Component::new(0.3, DVector::from_vec(vec![0.5, -0.2, 1.0]), 0.8).unwrap(),
            Component::new(0.7, DVector::from_vec(vec![-1.0, 2.0, 0.0]), 1.3).unwrap(),
        ])
        .unwrap();
        for y in [[0.0, 0.0, 0.0], [0.4, -0.1, 0.9], [-1.2, 1.7, 0.3]] {
            let stats = exact_point_stats(&mix, &y);
            let p = DVector::from_row_slice(&y);
            let full = exact_density_derivatives(&mix, &p);
            assert_relative_eq!(stats.density, full.density, max_relative = 1e-14);
            assert_relative_eq!(
                stats.gradient_norm,
                full.gradient.norm(),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                stats.hessian_max_eigenvalue,
                sym_max_eigenvalue(&full.hessian),
                max_relative = 1e-12,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn closed_form_eigenvalues_match_the_solver() {
        let m = DMatrix::from_row_slice(2, 2, &[-3.0, 0.7, 0.7, -1.2]);
        let via_solver = m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::NEG_INFINITY, |a, &e| a.max(e));
        assert_relative_eq!(sym_max_eigenvalue(&m), via_solver, max_relative = 1e-14);
    }

    #[test]
    fn density_at_the_mean_is_recovered_within_the_spread() {
        let mix = single(1.0, 1);
        let batch = sample(&mix, 1_000_000, 11);
        let points = vec![DVector::zeros(1)];
        let est = &estimate_density_derivatives(&batch, &points, &cfg(0.1))[0];
        // The tolerance is statistical; the 3x spread also covers the
        // ball-smoothing bias of roughly pi r^2 / 3 at this radius.
        assert!(
            (est.density - 1.0).abs() <= 3.0 * est.density_tol,
            "density {} tol {}",
            est.density,
            est.density_tol
        );
        assert!(est.in_ball > 100_000);
    }

    #[test]
    fn gradient_at_the_mean_vanishes_within_tolerance() {
        let mix = single(1.0, 1);
        let batch = sample(&mix, 1_000_000, 12);
        let points = vec![DVector::zeros(1)];
        let est = &estimate_density_derivatives(&batch, &points, &cfg(0.1))[0];
        assert!(
            est.gradient.norm() <= est.gradient_tol,
            "gradient {} tol {}",
            est.gradient.norm(),
            est.gradient_tol
        );
    }

    #[test]
    fn derivative_estimates_track_the_closed_forms_off_center() {
        let mix = single(1.0, 1);
        let batch = sample(&mix, 4_000_000, 13);
        let points = vec![
            DVector::from_vec(vec![0.3]),
            DVector::from_vec(vec![-0.45]),
        ];
        for est in estimate_density_derivatives(&batch, &points, &cfg(0.1)) {
            let exact = exact_density_derivatives(&mix, &est.point);
            // Tolerances are statistical only; allow 5% for smoothing bias.
            let d_gap = (est.density - exact.density).abs();
            assert!(d_gap <= est.density_tol + 0.05 * exact.density);
            let g_gap = (&est.gradient - &exact.gradient).norm();
            assert!(
                g_gap <= est.gradient_tol + 0.05 * exact.gradient.norm(),
                "gradient gap {g_gap} tol {}",
                est.gradient_tol
            );
            let h_gap = (&est.hessian - &exact.hessian).norm();
            assert!(
                h_gap <= est.hessian_tol + 0.08 * exact.hessian.norm(),
                "hessian gap {h_gap} tol {}",
                est.hessian_tol
            );
        }
    }

    #[test]
    fn empty_ball_reports_zero_density_with_infinite_tolerance() {
        let mix = single(1.0, 2);
        let batch = sample(&mix, 10_000, 14);
        let points = vec![DVector::from_vec(vec![100.0, 100.0])];
        let est = &estimate_density_derivatives(&batch, &points, &cfg(0.2))[0];
        assert_eq!(est.density, 0.0);
        assert_eq!(est.density_tol, f64::INFINITY);
        assert_eq!(est.in_ball, 0);
        assert_eq!(est.gradient_tol, f64::INFINITY);
        assert_eq!(est.hessian_tol, f64::INFINITY);
    }

    #[test]
    fn estimated_density_riemann_sums_to_unit_mass() {
        let mix = MixtureParams::new(vec![
            Component::new(0.5, DVector::from_vec(vec![-0.8, 0.0]), 1.0).unwrap(),
            Component::new(0.5, DVector::from_vec(vec![0.8, 0.4]), 1.0).unwrap(),
        ])
        .unwrap();
        let batch = sample(&mix, 200_000, 15);
        let net_cfg = cfg(0.2).with_radius(4.0).with_spacing(0.2);
        let points = crate::net::build_net(&net_cfg, 2).unwrap();
        let estimates = estimate_density_derivatives(&batch, &points, &net_cfg);
        let mass: f64 = estimates.iter().map(|e| e.density * 0.04).sum();
        assert!((mass - 1.0).abs() < 0.05, "Riemann mass {mass}");
    }

    #[test]
    fn estimates_are_deterministic_across_runs() {
        let mix = single(0.9, 2);
        let batch = sample(&mix, 50_000, 16);
        let points = vec![
            DVector::from_vec(vec![0.1, -0.2]),
            DVector::from_vec(vec![0.0, 0.3]),
        ];
        let a = estimate_density_derivatives(&batch, &points, &cfg(0.15));
        let b = estimate_density_derivatives(&batch, &points, &cfg(0.15));
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.density.to_bits(), y.density.to_bits());
            assert_eq!(x.gradient, y.gradient);
            assert_eq!(x.hessian, y.hessian);
        }
    }

    #[test]
    fn sampled_oracle_matches_the_batch_estimate() {
        let mix = single(1.0, 1);
        let batch = sample(&mix, 100_000, 17);
        let cells = SampleCells::new(&batch, 0.1);
        let oracle = DensityOracle::Sampled(&cells);
        let (f, tol) = oracle.density(&[0.2]);
        let points = vec![DVector::from_vec(vec![0.2])];
        let est = &estimate_density_derivatives(&batch, &points, &cfg(0.1))[0];
        assert_eq!(f.to_bits(), est.density.to_bits());
        assert_eq!(tol.to_bits(), est.density_tol.to_bits());
    }
}
