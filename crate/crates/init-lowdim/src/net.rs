//! Axis-aligned search grid over a ball.

use nalgebra::DVector;

use crate::config::NetConfig;
use crate::error::InitError;

pub(crate) const MAX_DIM: usize = 6;

/// Lazily enumerated grid: coordinates are decoded from a flat index, so the
/// full point list never has to be materialized.
#[derive(Debug, Clone)]
pub(crate) struct NetGrid {
    d: usize,
    spacing: f64,
    radius_sq: f64,
    /// Largest per-axis step index; axis coordinates run over
    /// `-m..=m` times the spacing.
    m: i64,
    per_axis: usize,
}

impl NetGrid {
    pub(crate) fn new(cfg: &NetConfig, d: usize) -> Result<Self, InitError> {
        cfg.validate()?;
        if d == 0 || d > MAX_DIM {
            return Err(InitError::DimensionTooHigh { d, max: MAX_DIM });
        }
        let cells = (2.0 * cfg.radius / cfg.spacing).powi(d as i32);
        if cells > cfg.max_points {
            // Invert cells <= guard for the spacing that would fit.
            let required_spacing = 2.0 * cfg.radius / cfg.max_points.powf(1.0 / d as f64);
            return Err(InitError::NetTooFine {
                points: cells,
                guard: cfg.max_points,
                required_spacing,
            });
        }
        let m = (cfg.radius / cfg.spacing).floor() as i64;
        Ok(NetGrid {
            d,
            spacing: cfg.spacing,
            radius_sq: cfg.radius * cfg.radius,
            m,
            per_axis: (2 * m + 1) as usize,
        })
    }

    pub(crate) fn total_cells(&self) -> usize {
        self.per_axis.pow(self.d as u32)
    }

    /// Decodes flat index `flat` into `buf[..d]` and reports whether the
    /// point lies inside the ball.
    pub(crate) fn decode(&self, flat: usize, buf: &mut [f64]) -> bool {
        let mut rest = flat;
        let mut norm_sq = 0.0;
        for c in buf.iter_mut().take(self.d) {
            let idx = (rest % self.per_axis) as i64 - self.m;
            rest /= self.per_axis;
            *c = idx as f64 * self.spacing;
            norm_sq += *c * *c;
        }
        norm_sq <= self.radius_sq
    }
}

/// Materializes the grid points inside the radius-`cfg.radius` ball, in flat
/// index order (last axis slowest). Intended for modest grids; the pipeline
/// streams the same enumeration without collecting it.
pub fn build_net(cfg: &NetConfig, d: usize) -> Result<Vec<DVector<f64>>, InitError> {
    let grid = NetGrid::new(cfg, d)?;
    let mut buf = [0.0; MAX_DIM];
    let mut points = Vec::new();
    for flat in 0..grid.total_cells() {
        if grid.decode(flat, &mut buf) {
            points.push(DVector::from_row_slice(&buf[..d]));
        }
    }
    Ok(points)
}
