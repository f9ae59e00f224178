/// Knobs for one refinement run.
///
/// `delta` is the target accuracy in normalized units (mean error divided
/// by the component's sigma). Estimator noise is controlled directly by the
/// two sample counts; the implied statistical tolerances are measured and
/// reported rather than derived from unspecified constants.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    pub delta: f64,
    /// Real-sample budget for the restricted-mean target. Advisory for
    /// callers that draw the batch; the estimator uses whatever it is given.
    pub samples_b: usize,
    /// Synthetic draws per source component for each Monte Carlo value or
    /// Jacobian evaluation.
    pub samples_per_component: usize,
    /// Newton budget override; `None` computes it from the dimension and
    /// `delta`.
    pub iterations: Option<usize>,
    /// Evaluate values and Jacobians by adaptive quadrature instead of
    /// Monte Carlo. One-dimensional only.
    pub exact_quadrature: bool,
    pub seed: u64,
    /// Constant `c0` in the basin radius `c0 min(d, k)^{-5/2}`.
    pub basin_constant: f64,
    /// Margin constant for the warn-only separation audit of initializers.
    pub gate_c: f64,
}

impl RefineConfig {
    pub fn new(delta: f64, samples_b: usize, samples_per_component: usize, seed: u64) -> Self {
        assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
        assert!(samples_b >= 1, "need at least one target sample");
        assert!(samples_per_component >= 1, "need at least one draw per component");
        RefineConfig {
            delta,
            samples_b,
            samples_per_component,
            iterations: None,
            exact_quadrature: false,
            seed,
            basin_constant: 0.5,
            gate_c: 4.0,
        }
    }

    pub fn with_iterations(mut self, t: usize) -> Self {
        assert!(t >= 1, "need at least one iteration");
        self.iterations = Some(t);
        self
    }

    pub fn with_exact_quadrature(mut self, yes: bool) -> Self {
        self.exact_quadrature = yes;
        self
    }

    pub fn with_basin_constant(mut self, c0: f64) -> Self {
        assert!(c0 > 0.0, "basin constant must be positive");
        self.basin_constant = c0;
        self
    }

    pub fn with_gate_c(mut self, c: f64) -> Self {
        assert!(c > 0.0, "gate constant must be positive");
        self.gate_c = c;
        self
    }

    /// Newton budget: the override if set, else `ceil(4 ln ln(d / delta))`
    /// clamped to at least one step.
    pub fn planned_iterations(&self, d: usize) -> usize {
        if let Some(t) = self.iterations {
            return t;
        }
        let l = (d as f64 / self.delta).ln();
        if l <= 1.0 {
            1
        } else {
            (4.0 * l.ln()).ceil().max(1.0) as usize
        }
    }

    /// Basin radius in normalized units; refinement assumes initializers
    /// start within this much of the true normalized means.
    pub fn basin_radius(&self, d: usize, k: usize) -> f64 {
        self.basin_constant * (d.min(k) as f64).powf(-2.5)
    }
}
