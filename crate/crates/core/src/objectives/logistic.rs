use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::glm::{GlmCore, Link};
use super::{
    sigmoid, softplus, Capabilities, FiniteSum, LipschitzInfo, Objective, ObjectiveError,
    Provenance,
};
use crate::dataset::Dataset;
use crate::linalg::SymmetricOperator;

pub use super::glm::Regularizer;

/// Sup of `|σ'(z)(1 - 2σ(z))|`, the third derivative of softplus.
const SOFTPLUS_D3_MAX: f64 = 0.096_225_044_864_937_6;

pub(crate) struct CrossEntropy;

impl Link for CrossEntropy {
    fn loss(&self, y: f64, z: f64) -> f64 {
        softplus(z) - y * z
    }

    fn d1(&self, y: f64, z: f64) -> f64 {
        sigmoid(z) - y
    }

    fn d2(&self, _y: f64, z: f64) -> f64 {
        let s = sigmoid(z);
        s * (1.0 - s)
    }
}

/// Binary cross-entropy over {0,1} labels plus a separable penalty.
///
/// With [`Regularizer::Nonconvex`] this is the nonconvex benchmark problem;
/// with [`Regularizer::Ridge`] it is strongly convex.
pub struct LogisticRegressionProblem {
    core: GlmCore<CrossEntropy>,
    lipschitz: LipschitzInfo,
}

impl LogisticRegressionProblem {
    /// The benchmark problem with the bounded nonconvex penalty of weight `alpha`.
    pub fn new(data: Arc<Dataset>, alpha: f64) -> Self {
        Self::with_regularizer(data, Regularizer::Nonconvex { alpha })
    }

    pub fn with_regularizer(data: Arc<Dataset>, reg: Regularizer) -> Self {
        let lipschitz = Self::bounds(&data, reg, Provenance::Estimated);
        Self {
            core: GlmCore {
                data,
                link: CrossEntropy,
                reg,
            },
            lipschitz,
        }
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.lipschitz.provenance = provenance;
        self
    }

    /// `L1 <= (1/4n) Σ ||x_i||^2 + reg`, `L2 <= c (1/n) Σ ||x_i||^3 + reg`.
    fn bounds(data: &Dataset, reg: Regularizer, provenance: Provenance) -> LipschitzInfo {
        let n = data.len().max(1) as f64;
        let (mut sq, mut cube) = (0.0, 0.0);
        for i in 0..data.len() {
            let r2 = data.row_norm_sq(i);
            sq += r2;
            cube += r2 * r2.sqrt();
        }
        let (reg1, reg2) = reg.lipschitz_bounds();
        LipschitzInfo {
            l1: 0.25 * sq / n + reg1,
            l2: SOFTPLUS_D3_MAX * cube / n + reg2,
            provenance,
        }
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.core.data
    }

    pub fn regularizer(&self) -> Regularizer {
        self.core.reg
    }
}

impl Objective for LogisticRegressionProblem {
    fn dim(&self) -> usize {
        self.core.data.dim()
    }

    fn value(&self, w: &DVector<f64>) -> Result<f64, ObjectiveError> {
        self.core.value(w)
    }

    fn gradient(&self, w: &DVector<f64>) -> Result<DVector<f64>, ObjectiveError> {
        self.core.gradient(w)
    }

    fn hessian_at(
        &self,
        w: &DVector<f64>,
    ) -> Result<Box<dyn SymmetricOperator + '_>, ObjectiveError> {
        Ok(Box::new(self.core.hessian(w, None)?))
    }

    fn full_hessian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>, ObjectiveError> {
        self.core.full_hessian(w)
    }

    fn lipschitz(&self) -> LipschitzInfo {
        self.lipschitz
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            dense_hessian: self.dim() <= self.dense_cap(),
            finite_sum: true,
        }
    }

    fn as_finite_sum(&self) -> Option<&dyn FiniteSum> {
        Some(self)
    }
}

impl FiniteSum for LogisticRegressionProblem {
    fn num_samples(&self) -> usize {
        self.core.data.len()
    }

    fn sampled_hessian_at(
        &self,
        w: &DVector<f64>,
        indices: &[usize],
    ) -> Result<Box<dyn SymmetricOperator + '_>, ObjectiveError> {
        Ok(Box::new(self.core.hessian(w, Some(indices))?))
    }
}
