//! Newton's method for nonlinear systems `F(x) = b` with inexact oracles.
//!
//! The iteration is `x <- x + F'(x)^{-1} (b - F(x))`, with every norm taken
//! in infinity flavor. The solver never line-searches or damps; the caller
//! guarantees a starting point inside the basin (radius `eps0`), and the
//! report carries enough per-step diagnostics to check the quadratic error
//! recursion offline.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::norms::{inf_operator_norm, varah_inverse_bound, Dominance};

/// Reported oracle accuracies: `eta1` for the target, `eta2` for values,
/// `eta3` for Jacobians (all infinity-norm, zero meaning exact).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleAccuracy {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

/// A system `F(x) = b` presented through possibly-noisy estimates. Methods
/// take `&mut self` so an oracle may consume fresh randomness per call.
pub trait SystemOracle {
    fn dim(&self) -> usize;

    /// Estimate of the right-hand side `b`. Called once per solve.
    fn target_b(&mut self) -> DVector<f64>;

    /// Estimate of `F(x)`.
    fn eval_f(&mut self, x: &DVector<f64>) -> DVector<f64>;

    /// Estimate of the Jacobian `F'(x)`.
    fn eval_fprime(&mut self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Declared accuracies of the three estimates.
    fn accuracy(&self) -> OracleAccuracy {
        OracleAccuracy::default()
    }
}

/// Solver knobs. `stop_tolerance` is the final accuracy delta; iteration
/// stops after `max_iterations` or once a step is shorter than `delta / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub max_iterations: usize,
    pub stop_tolerance: f64,
    pub neighborhood_radius: f64,
    /// Halt with a diagnostic when an iterate's Jacobian estimate is not
    /// strictly diagonally dominant. Off by default: dominance is a
    /// sufficient condition for invertibility, not a necessary one.
    pub require_dominant: bool,
}

impl SolveConfig {
    pub fn new(max_iterations: usize, stop_tolerance: f64, neighborhood_radius: f64) -> Self {
        assert!(max_iterations >= 1, "need at least one iteration");
        assert!(stop_tolerance > 0.0, "stop tolerance must be positive");
        assert!(neighborhood_radius > 0.0, "neighborhood must be positive");
        SolveConfig {
            max_iterations,
            stop_tolerance,
            neighborhood_radius,
            require_dominant: false,
        }
    }

    pub fn require_dominant(mut self, yes: bool) -> Self {
        self.require_dominant = yes;
        self
    }
}

/// Why the solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Termination {
    #[error("step shorter than half the stop tolerance")]
    StepTolerance,
    #[error("iteration budget exhausted")]
    MaxIterations,
    #[error("Jacobian estimate singular to working precision")]
    SingularJacobian,
    #[error("Jacobian estimate not diagonally dominant")]
    NotDominant,
    #[error("iterate left the ball of radius 2 eps0 around the start")]
    OutOfNeighborhood,
}

/// Per-step trace of a solve. Entry `t` of each list describes step `t`:
/// the Jacobian diagnostics at the pre-step point and the iterate the step
/// produced. All four lists always share their length.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub initial_point: DVector<f64>,
    pub iterates: Vec<DVector<f64>>,
    pub step_norms: Vec<f64>,
    /// Varah margin `min_i (a_ii - sum_{j != i} |a_ij|)` of each Jacobian
    /// estimate; may be negative.
    pub dominance_margins: Vec<f64>,
    /// Infinity norm of the explicitly computed Jacobian inverse, the
    /// `||F'(u)^{-1}||` appearing in the error recursion.
    pub inverse_norm_bounds: Vec<f64>,
    /// Infinity norm of each Jacobian estimate (the recursion's `B`).
    pub jacobian_norms: Vec<f64>,
    pub converged: bool,
    pub termination: Termination,
}

impl SolveReport {
    /// Final iterate, or the initial point when no step completed.
    pub fn solution(&self) -> &DVector<f64> {
        self.iterates.last().unwrap_or(&self.initial_point)
    }

    pub fn steps(&self) -> usize {
        self.iterates.len()
    }
}

/// Runs the iteration from `x0`. Linear solves use LU with partial
/// pivoting; the explicit inverse is formed once per step purely for the
/// diagnostic columns of the report.
pub fn newton_solve<O: SystemOracle + ?Sized>(
    oracle: &mut O,
    x0: DVector<f64>,
    cfg: &SolveConfig,
) -> SolveReport {
    assert_eq!(x0.len(), oracle.dim(), "start point has wrong dimension");
    let b = oracle.target_b();
    assert_eq!(b.len(), oracle.dim(), "oracle target has wrong dimension");

    let mut report = SolveReport {
        initial_point: x0.clone(),
        iterates: Vec::new(),
        step_norms: Vec::new(),
        dominance_margins: Vec::new(),
        inverse_norm_bounds: Vec::new(),
        jacobian_norms: Vec::new(),
        converged: false,
        termination: Termination::MaxIterations,
    };

    let mut x = x0.clone();
    for _ in 0..cfg.max_iterations {
        let j = oracle.eval_fprime(&x);
        let dominance = varah_inverse_bound(&j);
        if cfg.require_dominant && matches!(dominance, Dominance::NotDominant { .. }) {
            report.termination = Termination::NotDominant;
            return report;
        }
        let jac_norm = inf_operator_norm(&j);
        let lu = j.clone().lu();
        let inverse = match lu.try_inverse() {
            Some(inv) => inv,
            None => {
                report.termination = Termination::SingularJacobian;
                return report;
            }
        };
        let fx = oracle.eval_f(&x);
        let residual = &b - &fx;
        let step = lu.solve(&residual).expect("inverse exists, solve cannot fail");
        let step_norm = step.amax();
        if !step_norm.is_finite() {
            report.termination = Termination::SingularJacobian;
            return report;
        }
        x += &step;

        report.iterates.push(x.clone());
        report.step_norms.push(step_norm);
        report.dominance_margins.push(dominance.margin());
        report.inverse_norm_bounds.push(inf_operator_norm(&inverse));
        report.jacobian_norms.push(jac_norm);

        if (&x - &x0).amax() > 2.0 * cfg.neighborhood_radius {
            report.termination = Termination::OutOfNeighborhood;
            return report;
        }
        if step_norm < cfg.stop_tolerance / 2.0 {
            report.converged = true;
            report.termination = Termination::StepTolerance;
            return report;
        }
    }
    report
}
