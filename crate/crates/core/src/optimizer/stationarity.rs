use nalgebra::DVector;

use crate::cubic::random_probe;
use crate::linalg::{sorted_eigen, Lanczos, SymmetricOperator};
use crate::objectives::{Objective, ObjectiveError};

/// Outcome of the `(‖∇f‖ <= ε, λ_min >= -√ε)` test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityVerdict {
    pub grad_norm: f64,
    pub lambda_min: f64,
    pub eps: f64,
    pub pass: bool,
    /// False when the eigenvalue estimate did not converge.
    pub lambda_converged: bool,
}

impl StationarityVerdict {
    pub fn new(grad_norm: f64, lambda_min: f64, eps: f64) -> Self {
        Self {
            grad_norm,
            lambda_min,
            eps,
            pass: grad_norm <= eps && lambda_min >= -eps.sqrt(),
            lambda_converged: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub value: f64,
    pub converged: bool,
    /// Lanczos dimension, or 0 for a dense eigensolve.
    pub iterations: usize,
}

/// Smallest eigenvalue of a symmetric operator.
///
/// Operators with a dense form are solved exactly. Otherwise Lanczos with full
/// reorthogonalization runs from a seeded random start until the lowest Ritz
/// pair's residual `β_k |z_k|` drops below `tol * max(1, |θ|_max)`.
pub fn estimate_lambda_min(op: &dyn SymmetricOperator, tol: f64, seed: u64) -> LambdaEstimate {
    if let Some(h) = op.dense() {
        return LambdaEstimate {
            value: sorted_eigen(&h).values[0],
            converged: true,
            iterations: 0,
        };
    }
    let d = op.dim();
    let mut lz = Lanczos::new(op, &random_probe(d, seed));
    let mut best = f64::INFINITY;
    let mut converged = false;
    while lz.extend() {
        let eig = sorted_eigen(&lz.tridiagonal());
        let k = lz.dim();
        best = eig.values[0];
        let ritz_residual = lz.last_beta() * eig.vectors[(k - 1, 0)].abs();
        if lz.exhausted() || ritz_residual <= tol * eig.values.amax().max(1.0) {
            converged = true;
            break;
        }
    }
    LambdaEstimate {
        value: best,
        converged,
        iterations: lz.dim(),
    }
}

pub fn stationarity_check(
    oracle: &dyn Objective,
    x: &DVector<f64>,
    eps: f64,
) -> Result<StationarityVerdict, ObjectiveError> {
    let g = oracle.gradient(x)?;
    let h = oracle.hessian_at(x)?;
    let est = estimate_lambda_min(&*h, 1e-8, 0);
    let mut v = StationarityVerdict::new(g.norm(), est.value, eps);
    v.lambda_converged = est.converged;
    Ok(v)
}
