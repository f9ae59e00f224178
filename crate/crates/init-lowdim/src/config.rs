//! Net-search configuration and its derived defaults.

use gmm_core::DerivedStats;

use crate::error::InitError;

/// Grid, estimation, and acceptance parameters for the net search.
///
/// `derived` fills every field from mixture statistics. The derived spacing
/// is usually far too fine for an in-memory net, which is intentional: the
/// guard rejects it with a hint, and callers override `spacing` and
/// `estimation_ball_radius` to the budget they can afford.
#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    /// Radius of the ball the net covers, twice the mixture's boundedness
    /// radius by default.
    pub radius: f64,
    /// Axis spacing of the grid.
    pub spacing: f64,
    /// Radius of the ball around each net point whose samples feed the
    /// density and derivative estimates.
    pub estimation_ball_radius: f64,
    /// Target accuracy for the density estimates. Attained tolerances above
    /// it are reported, not enforced.
    pub density_accuracy: f64,
    /// Acceptance scale `exp(-c0 d)`; smaller values tighten the gradient
    /// condition and shrink the guaranteed candidate-to-mean distance.
    pub epsilon0: f64,
    /// Upper bound on `(2 radius / spacing)^d` before the grid is even
    /// enumerated.
    pub max_points: f64,
}

pub const DEFAULT_C0: f64 = 2.0;
pub const DEFAULT_MAX_POINTS: f64 = 1e8;

impl NetConfig {
    /// Default configuration for dimension `d` with rate constant `c0`.
    ///
    /// Spacing starts from `epsilon0 sqrt(d) sigma_min^3 / (64 sigma_max^2)`,
    /// is shrunk by `2/sqrt(d)` when d > 4 so the grid's covering radius
    /// `(sqrt(d)/2) spacing` stays below that bound, and is then snapped so
    /// the radius is an exact multiple of it; snapping keeps the covering
    /// guarantee tight out to the boundary of the ball.
    pub fn derived_with_c0(stats: &DerivedStats, d: usize, c0: f64) -> Self {
        assert!(d >= 1, "dimension must be positive");
        let dd = d as f64;
        let epsilon0 = (-c0 * dd).exp();
        let delta = epsilon0 * dd.sqrt() * stats.sigma_min.powi(3)
            / (64.0 * stats.sigma_max.powi(2));
        let radius = 2.0 * stats.rho;
        let unsnapped = delta * (2.0 / dd.sqrt()).min(1.0);
        let spacing = radius / (radius / unsnapped).ceil();
        let gamma = stats.w_min * stats.sigma_max.powi(-(d as i32 + 4)) * epsilon0.powi(3)
            * delta
            * delta
            / 4.0;
        NetConfig {
            radius,
            spacing,
            estimation_ball_radius: stats.sigma_min / 8.0,
            density_accuracy: gamma,
            epsilon0,
            max_points: DEFAULT_MAX_POINTS,
        }
    }

    /// `derived_with_c0` at the default rate constant.
    pub fn derived(stats: &DerivedStats, d: usize) -> Self {
        Self::derived_with_c0(stats, d, DEFAULT_C0)
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn with_estimation_ball_radius(mut self, r: f64) -> Self {
        self.estimation_ball_radius = r;
        self
    }

    pub fn with_max_points(mut self, max_points: f64) -> Self {
        self.max_points = max_points;
        self
    }

    pub(crate) fn validate(&self) -> Result<(), InitError> {
        for (name, v) in [
            ("radius", self.radius),
            ("spacing", self.spacing),
            ("estimation_ball_radius", self.estimation_ball_radius),
            ("density_accuracy", self.density_accuracy),
            ("max_points", self.max_points),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(InitError::BadConfig {
                    reason: format!("{name} must be positive and finite, got {v}"),
                });
            }
        }
        if !(self.epsilon0 > 0.0 && self.epsilon0 < 1.0) {
            return Err(InitError::BadConfig {
                reason: format!("epsilon0 must lie in (0, 1), got {}", self.epsilon0),
            });
        }
        Ok(())
    }
}
