//! Subsampled Hessians for finite-sum objectives and the sample-size bounds
//! that make them accurate with high probability.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dataset::{draw_indices, BatchSpec, DatasetError};
use crate::linalg::SymmetricOperator;
use crate::objectives::{FiniteSum, ObjectiveError};

#[derive(Debug, Error)]
pub enum SubsamplingError {
    #[error("objective has no finite-sum structure")]
    NotFiniteSum,
    #[error("invalid inexact configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// How the Hessian accuracy target is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccuracyMode {
    /// Use `eps1` as given.
    FixedEps1,
    /// `eps1 = theta * sqrt(eps)`.
    Coupled,
}

/// How many samples each iteration draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatchPolicy {
    /// [`per_iteration_batch_size`] with the configured accuracy.
    Formula,
    /// `ceil(fraction * n)`.
    Fraction(f64),
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InexactConfig {
    pub eps1: f64,
    pub theta: f64,
    /// Total failure probability.
    pub delta: f64,
    /// Per-iteration failure probability.
    pub zeta: f64,
    pub mode: AccuracyMode,
    pub batch: BatchPolicy,
    /// Stop once `||s|| <= eps1` before running the stationarity check.
    pub step_norm_stop: bool,
    /// Constant in [`total_hessian_budget`]; only illustrative.
    pub budget_constant: f64,
}

impl Default for InexactConfig {
    fn default() -> Self {
        Self {
            eps1: 0.1,
            theta: 1.0,
            delta: 0.1,
            zeta: 0.1,
            mode: AccuracyMode::Coupled,
            batch: BatchPolicy::Formula,
            step_norm_stop: true,
            budget_constant: 1.0,
        }
    }
}

impl InexactConfig {
    pub fn with_fraction(fraction: f64) -> Self {
        Self {
            batch: BatchPolicy::Fraction(fraction),
            step_norm_stop: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SubsamplingError> {
        let bad = |m: &str| Err(SubsamplingError::InvalidConfig(m.to_string()));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return bad("zeta must lie in (0, 1)");
        }
        match self.mode {
            AccuracyMode::FixedEps1 if !(self.eps1 > 0.0 && self.eps1.is_finite()) => {
                return bad("eps1 must be positive")
            }
            AccuracyMode::Coupled if !(self.theta > 0.0 && self.theta.is_finite()) => {
                return bad("theta must be positive")
            }
            _ => {}
        }
        match self.batch {
            BatchPolicy::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                bad("batch fraction must lie in (0, 1]")
            }
            BatchPolicy::Fixed(0) => bad("batch size must be at least 1"),
            _ => Ok(()),
        }
    }

    /// The Hessian accuracy target for stationarity tolerance `eps`.
    pub fn accuracy(&self, eps: f64) -> f64 {
        match self.mode {
            AccuracyMode::FixedEps1 => self.eps1,
            AccuracyMode::Coupled => self.theta * eps.sqrt(),
        }
    }

    /// Batch size for `n` samples in dimension `d`, clamped to `[1, n]`.
    /// The flag reports whether the unclamped size exceeded `n`.
    pub fn batch_size(&self, l1: f64, eps: f64, d: usize, n: usize) -> (usize, bool) {
        let raw = match self.batch {
            BatchPolicy::Formula => per_iteration_batch_size(l1, self.accuracy(eps), self.zeta, d),
            BatchPolicy::Fraction(f) => (f * n as f64).ceil() as u64,
            BatchPolicy::Fixed(m) => m as u64,
        };
        let clamped = raw > n as u64;
        ((raw.min(n as u64) as usize).max(1), clamped)
    }
}

/// `ceil((8 L1²/eps1² + 4 L1/(3 eps1)) ln(4d/zeta))`; callers clamp to `n`.
pub fn per_iteration_batch_size(l1: f64, eps1: f64, zeta: f64, d: usize) -> u64 {
    let bound =
        (8.0 * l1 * l1 / (eps1 * eps1) + 4.0 * l1 / (3.0 * eps1)) * (4.0 * d as f64 / zeta).ln();
    saturating_ceil(bound)
}

/// `ceil(C (8 L1²/(θ² ε^{5/2}) + 4 L1/(3 θ ε²)) ln(4d/(ε δ)))`.
pub fn total_hessian_budget(l1: f64, theta: f64, eps: f64, delta: f64, d: usize, c: f64) -> u64 {
    let bound = c
        * (8.0 * l1 * l1 / (theta * theta * eps.powf(2.5)) + 4.0 * l1 / (3.0 * theta * eps * eps))
        * (4.0 * d as f64 / (eps * delta)).ln();
    saturating_ceil(bound)
}

fn saturating_ceil(x: f64) -> u64 {
    if x.is_nan() || x <= 0.0 {
        0
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.ceil() as u64
    }
}

/// `||s|| <= eps1`, inclusive.
pub fn inexact_termination(step_norm: f64, eps1: f64) -> bool {
    step_norm <= eps1
}

/// `v -> (1/|S|) Σ_{i∈S} ∇²f_i(x) v` for a fixed index set.
///
/// Indices are sorted before summation, so the full index set reproduces the
/// exact Hessian bit for bit.
pub struct SubsampledHessian<'a> {
    op: Box<dyn SymmetricOperator + 'a>,
    indices: Vec<usize>,
}

impl<'a> SubsampledHessian<'a> {
    pub fn new(
        oracle: &'a dyn FiniteSum,
        x: &DVector<f64>,
        indices: &[usize],
    ) -> Result<Self, SubsamplingError> {
        if indices.is_empty() {
            return Err(ObjectiveError::EmptySampleSet.into());
        }
        let mut indices = indices.to_vec();
        indices.sort_unstable();
        let op = oracle.sampled_hessian_at(x, &indices)?;
        Ok(Self { op, indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn batch_len(&self) -> usize {
        self.indices.len()
    }
}

impl SymmetricOperator for SubsampledHessian<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.op.apply(v)
    }

    fn dense(&self) -> Option<DMatrix<f64>> {
        self.op.dense()
    }
}

/// Draws iteration `k`'s batch (stream `k` of `seed`, without replacement).
pub fn draw_iteration_batch(
    n: usize,
    size: usize,
    seed: u64,
    k: u64,
) -> Result<Vec<usize>, SubsamplingError> {
    Ok(draw_indices(n, &BatchSpec::new(size, seed).with_stream(k))?)
}
