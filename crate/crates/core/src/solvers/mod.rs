//! Optimizers for the secrecy sum-rate problems.
//!
//! Two iterative schemes cover the two decoder modes: a
//! majorize-and-ascend loop for joint decoding (linearize the leakage term
//! at the current covariances, solve the resulting concave subproblem,
//! repeat) and a weighted-MMSE alternation for per-user decoding (receive
//! filters, weights, then precoders under a per-user power constraint via a
//! Lagrangian bisection). Baselines: an on/off vertex search that is exact
//! for single-antenna transmitters, and a grid exhaustive search.
//!
//! All solvers are deterministic: same inputs and options give bitwise
//! identical outputs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::GvChannel;
use crate::error::{Error, Result};
use crate::linalg::{eye, hermitize, CMat};
use crate::rates::CovarianceSet;

mod mm;
mod psd;
mod search;
mod subproblem;
mod wmmse;

pub use mm::{mm_joint_secrecy, MmState};
pub use psd::project_psd_trace;
pub use search::{exhaustive_search_grid, simo_vertex_search, GridSolution};
pub use subproblem::{
    maximize_sum_capacity, solve_concave_subproblem, subproblem_gradient, subproblem_objective,
    Subresult,
};
pub use wmmse::{
    mmse_receivers, precoder_update, weight_update, wmmse_inde_secrecy, WmmseState,
};

/// Iteration caps, tolerances, and step-size knobs shared by all solvers.
/// Every field has a default, so partial JSON configs deserialize.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Outer-loop cap for both iterative algorithms.
    pub max_outer_iters: usize,
    /// Inner precoder-loop cap for the alternating scheme.
    pub max_inner_iters: usize,
    /// Projected-gradient iteration cap inside the concave subproblem.
    pub max_subproblem_iters: usize,
    /// Relative objective-change tolerance for loop termination.
    pub rel_tol: f64,
    /// Power bisection stops when |trace − P_k| ≤ power_tol_rel·P_k.
    pub power_tol_rel: f64,
    /// Projected-step norm (relative to the power scale) treated as zero.
    pub grad_tol: f64,
    /// Starting point uses this fraction of each budget, spread white.
    pub init_power_fraction: f64,
    /// Initial gradient step, in units of budget / gradient norm.
    pub step_init: f64,
    /// Multiplicative backtracking factor in (0, 1).
    pub backtrack: f64,
    /// Sufficient-increase constant for the backtracking line search.
    pub armijo_c: f64,
    /// Line-search attempts before declaring the iterate stationary.
    pub max_backtracks: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_outer_iters: 200,
            max_inner_iters: 50,
            max_subproblem_iters: 300,
            rel_tol: 1e-6,
            power_tol_rel: 1e-8,
            grad_tol: 1e-9,
            init_power_fraction: 1.0,
            step_init: 1.0,
            backtrack: 0.5,
            armijo_c: 1e-4,
            max_backtracks: 60,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0
            || self.max_inner_iters == 0
            || self.max_subproblem_iters == 0
            || self.max_backtracks == 0
        {
            return Err(Error::invalid("iteration caps must be at least 1"));
        }
        if !(self.rel_tol > 0.0)
            || !(self.power_tol_rel > 0.0)
            || !(self.grad_tol > 0.0)
            || !(self.step_init > 0.0)
        {
            return Err(Error::invalid("tolerances and steps must be positive"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::invalid("backtrack factor must lie in (0, 1)"));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::invalid("line-search constant must lie in (0, 1)"));
        }
        if !(self.init_power_fraction > 0.0 && self.init_power_fraction <= 1.0) {
            return Err(Error::invalid("initial power fraction must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Why a solver loop ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Relative progress fell below the tolerance.
    Converged,
    /// The iteration cap was reached with progress still above tolerance.
    IterationCap,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::IterationCap => "iteration_cap",
        })
    }
}

/// Objective history of one solver run.
///
/// `objective_bits[i]` is the unclipped secrecy sum rate after i outer
/// iterations (entry 0 is the starting point). For the alternating scheme,
/// `surrogate` holds one inner-loop cost sequence per outer iteration, in
/// nats; each sequence is nonincreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub objective_bits: Vec<f64>,
    pub surrogate: Vec<Vec<f64>>,
    pub iterations: usize,
    pub stop: StopReason,
}

impl SolveTrace {
    /// Two-column CSV of the outer objective history.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("iteration,objective_bits\n");
        for (i, v) in self.objective_bits.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective_bits.last().expect("trace holds at least the starting point")
    }
}

/// Eve's received covariance Σ_k G_k F_k G_k^H + σ_E² I.
pub(crate) fn eve_received_cov(ch: &GvChannel, f: &CovarianceSet) -> CMat {
    let e = ch.g[0].nrows();
    let mut acc = eye(e) * Complex64::new(ch.sigma_e2, 0.0);
    for k in 0..ch.users() {
        acc += &ch.g[k] * &f.f[k] * ch.g[k].adjoint();
    }
    hermitize(&acc)
}

/// Bob's received covariance Σ_k H_k F_k H_k^H + σ_B² I.
pub(crate) fn bob_received_cov(ch: &GvChannel, f: &CovarianceSet) -> CMat {
    let b = ch.h[0].nrows();
    let mut acc = eye(b) * Complex64::new(ch.sigma_b2, 0.0);
    for k in 0..ch.users() {
        acc += &ch.h[k] * &f.f[k] * ch.h[k].adjoint();
    }
    hermitize(&acc)
}
