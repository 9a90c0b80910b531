use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::logistic::{LogisticRegressionProblem, Regularizer};
use super::{check_point, Capabilities, LipschitzInfo, Objective, ObjectiveError, Provenance};
use crate::dataset::synthesize_classification;
use crate::linalg::SymmetricOperator;

/// Small landscapes with closed-form derivatives and analytic constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// `f(x) = x²/2`.
    QuadraticOneD,
    /// `f(x, y) = x⁴/4 - x²/2 + y²/2`: strict saddle at the origin, minima at
    /// `(±1, 0)` with value `-1/4`.
    StrictSaddleQuartic,
    /// Logistic loss with a unit ridge penalty on seeded 200×10 data.
    ConvexLogistic,
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticKind::QuadraticOneD => "quadratic-1d",
            SyntheticKind::StrictSaddleQuartic => "strict-saddle-quartic",
            SyntheticKind::ConvexLogistic => "convex-logistic",
        })
    }
}

impl FromStr for SyntheticKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quadratic-1d" => Ok(SyntheticKind::QuadraticOneD),
            "strict-saddle-quartic" => Ok(SyntheticKind::StrictSaddleQuartic),
            "convex-logistic" => Ok(SyntheticKind::ConvexLogistic),
            other => Err(format!("unknown synthetic problem {other:?}")),
        }
    }
}

impl SyntheticKind {
    /// Builds the landscape; `seed` only affects data-driven kinds.
    pub fn build(self, seed: u64) -> Box<dyn Objective> {
        match self {
            SyntheticKind::QuadraticOneD => Box::new(SyntheticProblem::quadratic_1d()),
            SyntheticKind::StrictSaddleQuartic => {
                Box::new(SyntheticProblem::strict_saddle_quartic())
            }
            SyntheticKind::ConvexLogistic => {
                Box::new(SyntheticProblem::convex_logistic(200, 10, seed, 1.0))
            }
        }
    }
}

/// Closed-form test landscapes in one or two dimensions.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticProblem {
    kind: SyntheticKind,
}

impl SyntheticProblem {
    pub fn quadratic_1d() -> Self {
        Self {
            kind: SyntheticKind::QuadraticOneD,
        }
    }

    pub fn strict_saddle_quartic() -> Self {
        Self {
            kind: SyntheticKind::StrictSaddleQuartic,
        }
    }

    /// Strongly convex logistic regression on `synthesize_classification(n, d, seed)`
    /// with penalty `(ridge/2)||w||²`. Its constants are valid global bounds.
    pub fn convex_logistic(n: usize, d: usize, seed: u64, ridge: f64) -> LogisticRegressionProblem {
        let data = Arc::new(synthesize_classification(n, d, seed));
        LogisticRegressionProblem::with_regularizer(data, Regularizer::Ridge { lambda: ridge })
            .with_provenance(Provenance::Analytic)
    }

    pub fn kind(&self) -> SyntheticKind {
        self.kind
    }

    fn hessian_diag(&self, w: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            SyntheticKind::QuadraticOneD => DVector::from_element(1, 1.0),
            _ => DVector::from_vec(vec![3.0 * w[0] * w[0] - 1.0, 1.0]),
        }
    }
}

struct DiagonalOperator(DVector<f64>);

impl SymmetricOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.0.component_mul(v)
    }

    fn dense(&self) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&self.0))
    }
}

impl Objective for SyntheticProblem {
    fn dim(&self) -> usize {
        match self.kind {
            SyntheticKind::QuadraticOneD => 1,
            _ => 2,
        }
    }

    fn value(&self, w: &DVector<f64>) -> Result<f64, ObjectiveError> {
        check_point(w, self.dim())?;
        Ok(match self.kind {
            SyntheticKind::QuadraticOneD => 0.5 * w[0] * w[0],
            _ => {
                let x2 = w[0] * w[0];
                0.25 * x2 * x2 - 0.5 * x2 + 0.5 * w[1] * w[1]
            }
        })
    }

    fn gradient(&self, w: &DVector<f64>) -> Result<DVector<f64>, ObjectiveError> {
        check_point(w, self.dim())?;
        Ok(match self.kind {
            SyntheticKind::QuadraticOneD => w.clone(),
            _ => DVector::from_vec(vec![w[0] * w[0] * w[0] - w[0], w[1]]),
        })
    }

    fn hessian_at(
        &self,
        w: &DVector<f64>,
    ) -> Result<Box<dyn SymmetricOperator + '_>, ObjectiveError> {
        check_point(w, self.dim())?;
        Ok(Box::new(DiagonalOperator(self.hessian_diag(w))))
    }

    fn full_hessian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>, ObjectiveError> {
        check_point(w, self.dim())?;
        Ok(DMatrix::from_diagonal(&self.hessian_diag(w)))
    }

    /// For the quartic the constants hold on the sublevel set `f <= 0`
    /// (`|x| <= √2`), where the Hessian entry `3x² - 1` is `6√2`-Lipschitz.
    fn lipschitz(&self) -> LipschitzInfo {
        match self.kind {
            SyntheticKind::QuadraticOneD => LipschitzInfo {
                l1: 1.0,
                l2: 0.0,
                provenance: Provenance::Analytic,
            },
            _ => LipschitzInfo {
                l1: 5.0,
                l2: 6.0 * std::f64::consts::SQRT_2,
                provenance: Provenance::Analytic,
            },
        }
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            dense_hessian: true,
            finite_sum: false,
        }
    }
}
