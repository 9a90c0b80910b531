//! Objective oracles: values, gradients and Hessian-vector products for the
//! benchmark problems and the synthetic test landscapes.

mod audit;
mod glm;
mod logistic;
mod robust;
mod synthetic;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::SymmetricOperator;

pub use audit::{finite_difference_audit, AuditReport};
pub use glm::GlmHessian;
pub use logistic::{LogisticRegressionProblem, Regularizer};
pub use robust::{robust_loss, robust_loss_d1, robust_loss_d2, RobustRegressionProblem};
pub use synthetic::{SyntheticKind, SyntheticProblem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("dimension {dim} exceeds the dense Hessian cap {cap}; use hessian_vector instead")]
    DenseCapExceeded { dim: usize, cap: usize },
    #[error("objective needs a nonempty dataset")]
    EmptyDataset,
    #[error("sample index {index} out of range for {n} samples")]
    SampleOutOfRange { index: usize, n: usize },
    #[error("empty sample set")]
    EmptySampleSet,
}

/// Where Lipschitz constants came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Exact or provably valid constants; Taylor-bound invariants apply.
    Analytic,
    /// Upper-bound estimates computed from the data.
    Estimated,
    Unknown,
}

/// Gradient (`l1`) and Hessian (`l2`) Lipschitz constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzInfo {
    pub l1: f64,
    pub l2: f64,
    pub provenance: Provenance,
}

impl LipschitzInfo {
    pub fn unknown() -> Self {
        Self {
            l1: f64::INFINITY,
            l2: f64::INFINITY,
            provenance: Provenance::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub dense_hessian: bool,
    pub finite_sum: bool,
}

/// A twice-differentiable objective `f: R^d -> R`.
///
/// Implementations are immutable and evaluate deterministically.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, w: &DVector<f64>) -> Result<f64, ObjectiveError>;

    fn gradient(&self, w: &DVector<f64>) -> Result<DVector<f64>, ObjectiveError>;

    /// The Hessian at `w` as a matrix-free operator.
    fn hessian_at(
        &self,
        w: &DVector<f64>,
    ) -> Result<Box<dyn SymmetricOperator + '_>, ObjectiveError>;

    /// `∇²f(w) v` without materializing the Hessian.
    fn hessian_vector(
        &self,
        w: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>, ObjectiveError> {
        check_point(v, self.dim())?;
        Ok(self.hessian_at(w)?.apply(v))
    }

    /// Dense Hessian, exactly symmetric. Fails above [`dense_cap`](Self::dense_cap).
    fn full_hessian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>, ObjectiveError>;

    fn lipschitz(&self) -> LipschitzInfo;

    fn capabilities(&self) -> Capabilities;

    fn dense_cap(&self) -> usize {
        crate::linalg::DEFAULT_DENSE_CAP
    }

    fn as_finite_sum(&self) -> Option<&dyn FiniteSum> {
        None
    }
}

/// Objectives of the form `f = (1/n) Σ f_i`.
pub trait FiniteSum: Objective {
    fn num_samples(&self) -> usize;

    /// Operator `v -> (1/|S|) Σ_{i∈S} ∇²f_i(w) v`, summed in the order given.
    fn sampled_hessian_at(
        &self,
        w: &DVector<f64>,
        indices: &[usize],
    ) -> Result<Box<dyn SymmetricOperator + '_>, ObjectiveError>;
}

pub(crate) fn check_point(w: &DVector<f64>, dim: usize) -> Result<(), ObjectiveError> {
    if w.len() != dim {
        return Err(ObjectiveError::DimensionMismatch {
            expected: dim,
            got: w.len(),
        });
    }
    if let Some(i) = w.iter().position(|x| !x.is_finite()) {
        return Err(ObjectiveError::NonFinite(i));
    }
    Ok(())
}

pub(crate) fn check_dense_cap(dim: usize, cap: usize) -> Result<(), ObjectiveError> {
    if dim > cap {
        Err(ObjectiveError::DenseCapExceeded { dim, cap })
    } else {
        Ok(())
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}
