//! Outer loops: cubic regularization (CR), CR with momentum (CRm) and the
//! accelerated CR baseline (CRa), each with exact or subsampled Hessians.
//!
//! One CRm iteration from `x_k` with previous cubic point `y_k`:
//!
//! ```text
//! s       = argmin_s ∇f(x_k)^T s + (1/2) s^T H_k s + (M/6)||s||³
//! y_{k+1} = x_k + s
//! β       = min(ρ, ||∇f(y_{k+1})||, ||s||)          (theory)
//!         = c ||s||                                 (practical)
//! v_{k+1} = y_{k+1} + β (y_{k+1} - y_k)
//! x_{k+1} = v_{k+1} if f(v_{k+1}) < f(y_{k+1}) else y_{k+1}
//! ```
//!
//! CR is the same loop with `x_{k+1} = y_{k+1}`.
//!
//! CRa is the accelerated scheme for convex problems, run here as an
//! experimental baseline without nonconvex guarantees. With `N = 6M`,
//! `x_1 = x_0 + s(x_0)` and `a_k = (k+1)(k+2)/2`:
//!
//! ```text
//! l_k     = Σ_{j<k} a_j ∇f(x_{j+1})
//! v_k     = x_0 - sqrt(2 / (N ||l_k||)) l_k
//! y_k     = (k/(k+3)) x_k + (3/(k+3)) v_k
//! x_{k+1} = y_k + s(y_k)
//! ```
//!
//! Its records carry the mixing weight `3/(k+3)` in the `beta` column and it
//! is not monotone.

mod bounds;
mod rate;
mod run;
mod stationarity;
mod steps;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use thiserror::Error;

use crate::cubic::{SolverKind, SolverOptions};
use crate::objectives::ObjectiveError;
use crate::subsampling::SubsamplingError;

pub use bounds::{BoundSlack, StepBounds, StepObservation};
pub use rate::{measure_quadratic_rate, rate_from_errors, RateReport, RateVerdict, TAIL_CEILING};
pub use run::run;
pub use stationarity::{
    estimate_lambda_min, stationarity_check, LambdaEstimate, StationarityVerdict,
};
pub use steps::{momentum_coefficient, momentum_point, monotone_select, Accepted};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Subsampling(#[from] SubsamplingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Cr,
    Crm,
    Cra,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Cr => "cr",
            Algorithm::Crm => "crm",
            Algorithm::Cra => "cra",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cr" => Ok(Algorithm::Cr),
            "crm" => Ok(Algorithm::Crm),
            "cra" => Ok(Algorithm::Cra),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MomentumMode {
    /// `β = min(ρ, ||∇f(y)||, ||s||)`.
    #[default]
    Theory,
    /// `β = c ||s||`; `c = 0` disables momentum.
    Practical(f64),
}

impl fmt::Display for MomentumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentumMode::Theory => f.write_str("theory"),
            MomentumMode::Practical(c) => write!(f, "practical:{c}"),
        }
    }
}

impl FromStr for MomentumMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theory" => Ok(MomentumMode::Theory),
            "practical" => Ok(MomentumMode::Practical(8.0)),
            _ => match s.strip_prefix("practical:") {
                Some(c) => c
                    .parse::<f64>()
                    .map(MomentumMode::Practical)
                    .map_err(|e| format!("bad momentum constant {c:?}: {e}")),
                None => Err(format!(
                    "unknown momentum mode {s:?} (expected theory or practical:<c>)"
                )),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoConfig {
    /// Cubic penalty `M`.
    pub penalty: f64,
    /// Momentum cap `ρ` in `(0, 1)`.
    pub rho: f64,
    pub momentum: MomentumMode,
    pub solver: SolverKind,
    /// Stationarity target `ε`.
    pub eps: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Subproblem settings; the seed is rederived every iteration.
    pub solver_options: SolverOptions,
    /// Estimate `λ_min` every iteration rather than only near stationarity.
    pub track_lambda_min: bool,
    /// Consecutive unconverged subproblems tolerated before aborting.
    pub max_solver_failures: usize,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            penalty: 10.0,
            rho: 0.9,
            momentum: MomentumMode::Theory,
            solver: SolverKind::Krylov,
            eps: 1e-5,
            max_iters: 1000,
            seed: 0,
            solver_options: SolverOptions::default(),
            track_lambda_min: false,
            max_solver_failures: 3,
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: String| Err(OptimizerError::InvalidConfig(m));
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return bad(format!("M must be positive, got {}", self.penalty));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (0, 1), got {}", self.rho));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if let MomentumMode::Practical(c) = self.momentum {
            if !(c >= 0.0 && c.is_finite()) {
                return bad(format!("momentum constant must be nonnegative, got {c}"));
            }
        }
        if self.solver_options.tol.is_nan() || self.solver_options.tol <= 0.0 {
            return bad("solver tolerance must be positive".into());
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminalStatus {
    StationaryPass,
    MaxIters,
    StepNormTermination,
    Aborted,
}

impl TerminalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalStatus::StationaryPass => "stationary-pass",
            TerminalStatus::MaxIters => "max-iters",
            TerminalStatus::StepNormTermination => "step-norm-termination",
            TerminalStatus::Aborted => "aborted",
        }
    }
}

impl fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TerminalStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            TerminalStatus::StationaryPass,
            TerminalStatus::MaxIters,
            TerminalStatus::StepNormTermination,
            TerminalStatus::Aborted,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
        .ok_or_else(|| format!("unknown terminal status {s:?}"))
    }
}

/// Telemetry for iteration `iter`, which moves `x_iter` to `x_{iter+1}`.
///
/// `f_value`, `grad_norm` and `lambda_min_est` describe `x_{iter+1}`;
/// `lambda_min_est` is NaN when it was not computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub wall_time_s: f64,
    pub f_value: f64,
    pub grad_norm: f64,
    /// `||y_{iter+1} - x_iter||` (from `y_iter` for the accelerated baseline).
    pub step_norm: f64,
    pub beta: f64,
    pub accepted: Accepted,
    pub lambda_min_est: f64,
    pub solver_residual: f64,
    pub hessian_samples: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub function_evals: usize,
    pub gradient_evals: usize,
    pub hessian_vector_products: usize,
    pub hessian_samples: usize,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub algorithm: Algorithm,
    pub inexact: bool,
    pub records: Vec<IterationRecord>,
    /// `x_0, x_1, ...`; one more entry than `records`.
    pub iterates: Vec<DVector<f64>>,
    /// Cubic points `y_1, y_2, ...`.
    pub cubic_points: Vec<DVector<f64>>,
    pub initial_value: f64,
    pub initial_grad_norm: f64,
    pub status: TerminalStatus,
    /// Last stationarity verdict computed, if any.
    pub verdict: Option<StationarityVerdict>,
    pub counters: Counters,
    pub batch_size: Option<usize>,
    pub batch_clamped: bool,
    pub warnings: Vec<String>,
}

impl Trace {
    pub fn final_point(&self) -> &DVector<f64> {
        self.iterates.last().expect("trace always holds x_0")
    }

    pub fn final_value(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_value, |r| r.f_value)
    }

    /// Number of iterations until `||∇f|| <= target` first holds.
    pub fn iterations_to(&self, target: f64) -> Option<usize> {
        if self.initial_grad_norm <= target {
            return Some(0);
        }
        self.records
            .iter()
            .position(|r| r.grad_norm <= target)
            .map(|i| i + 1)
    }

    /// Fraction of iterations (up to `upto`) that kept the momentum point.
    pub fn momentum_rate(&self, upto: usize) -> f64 {
        let recs = &self.records[..upto.min(self.records.len())];
        if recs.is_empty() {
            return 0.0;
        }
        recs.iter()
            .filter(|r| r.accepted == Accepted::Momentum)
            .count() as f64
            / recs.len() as f64
    }
}
