//! Volumes and surface areas of Euclidean balls in small dimension.

use std::f64::consts::PI;

/// Gamma function at `half / 2` for positive integer `half`, by the
/// recurrence from `Gamma(1/2) = sqrt(pi)` and `Gamma(1) = 1`. Exact to
/// rounding for the small arguments used here.
pub(crate) fn gamma_half_integer(half: usize) -> f64 {
    assert!(half >= 1, "argument must be positive");
    let mut z = if half % 2 == 1 { 0.5 } else { 1.0 };
    let mut g = if half % 2 == 1 { PI.sqrt() } else { 1.0 };
    while z < half as f64 / 2.0 - 0.25 {
        g *= z;
        z += 1.0;
    }
    g
}

/// Volume of the radius-`r` ball in `d` dimensions.
pub(crate) fn ball_volume(d: usize, r: f64) -> f64 {
    PI.powf(d as f64 / 2.0) * r.powi(d as i32) / gamma_half_integer(d + 2)
}

/// Surface area of the unit sphere in `d` dimensions (length of the circle
/// for d = 2, and 2 for d = 1).
pub(crate) fn sphere_surface_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half_integer(d)
}
