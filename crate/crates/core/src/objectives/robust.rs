use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::glm::{GlmCore, Link, Regularizer};
use super::{Capabilities, FiniteSum, LipschitzInfo, Objective, ObjectiveError, Provenance};
use crate::dataset::Dataset;
use crate::linalg::SymmetricOperator;

/// Sup of `|η'''(r)| = |r (3 - r²/2)| / (1 + r²/2)³`, attained near r = 0.6.
const ETA_D3_MAX: f64 = 1.031;

/// `η(r) = log(r²/2 + 1)`.
pub fn robust_loss(r: f64) -> f64 {
    (0.5 * r * r).ln_1p()
}

pub fn robust_loss_d1(r: f64) -> f64 {
    r / (1.0 + 0.5 * r * r)
}

/// Positive for `|r| < √2`, negative beyond.
pub fn robust_loss_d2(r: f64) -> f64 {
    let u = 0.5 * r * r;
    (1.0 - u) / ((1.0 + u) * (1.0 + u))
}

pub(crate) struct Robust;

impl Link for Robust {
    fn loss(&self, y: f64, z: f64) -> f64 {
        robust_loss(y - z)
    }

    fn d1(&self, y: f64, z: f64) -> f64 {
        -robust_loss_d1(y - z)
    }

    fn d2(&self, y: f64, z: f64) -> f64 {
        robust_loss_d2(y - z)
    }
}

/// Nonconvex robust linear regression `(1/n) Σ η(y_i - w^T x_i)`.
pub struct RobustRegressionProblem {
    core: GlmCore<Robust>,
    lipschitz: LipschitzInfo,
}

impl RobustRegressionProblem {
    pub fn new(data: Arc<Dataset>) -> Self {
        let n = data.len().max(1) as f64;
        let (mut sq, mut cube) = (0.0, 0.0);
        for i in 0..data.len() {
            let r2 = data.row_norm_sq(i);
            sq += r2;
            cube += r2 * r2.sqrt();
        }
        // |η''| <= 1
        let lipschitz = LipschitzInfo {
            l1: sq / n,
            l2: ETA_D3_MAX * cube / n,
            provenance: Provenance::Estimated,
        };
        Self {
            core: GlmCore {
                data,
                link: Robust,
                reg: Regularizer::None,
            },
            lipschitz,
        }
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.core.data
    }
}

impl Objective for RobustRegressionProblem {
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

impl FiniteSum for RobustRegressionProblem {
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
