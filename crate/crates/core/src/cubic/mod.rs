//! Solvers for the cubic-regularized model
//!
//! ```text
//! m(s) = g^T s + (1/2) s^T H s + (M/6) ||s||^3
//! ```
//!
//! Three interchangeable methods are provided: a dense eigendecomposition
//! solver that returns the global minimizer (including the hard case), a
//! Lanczos/Krylov subspace solver that only needs Hessian-vector products,
//! and plain gradient descent on `m`. Every returned solution carries a
//! residual `||g + H s + (M/2)||s|| s||` recomputed against the full operator.

mod exact;
mod gd;
mod krylov;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use thiserror::Error;

use crate::linalg::{SymmetricOperator, DEFAULT_DENSE_CAP};

pub use exact::solve_exact;
pub use gd::solve_gd;
pub use krylov::solve_krylov;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CubicError {
    #[error("cubic penalty must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("gradient has length {got}, operator has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not symmetric: max |H - H^T| = {asymmetry:e}")]
    NonSymmetric { asymmetry: f64 },
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },
    #[error("secular equation failed: {0}")]
    Secular(String),
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Exact,
    Krylov,
    GradientDescent,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Exact => "exact",
            SolverKind::Krylov => "krylov",
            SolverKind::GradientDescent => "gd",
        })
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "krylov" => Ok(SolverKind::Krylov),
            "gd" => Ok(SolverKind::GradientDescent),
            other => Err(format!(
                "unknown solver {other:?} (expected exact, krylov or gd)"
            )),
        }
    }
}

/// The model `g^T s + (1/2) s^T H s + (M/6)||s||^3`.
pub struct CubicSubproblem<'a> {
    gradient: DVector<f64>,
    hessian: &'a dyn SymmetricOperator,
    penalty: f64,
}

impl<'a> CubicSubproblem<'a> {
    pub fn new(
        gradient: DVector<f64>,
        hessian: &'a dyn SymmetricOperator,
        penalty: f64,
    ) -> Result<Self, CubicError> {
        if !(penalty > 0.0 && penalty.is_finite()) {
            return Err(CubicError::InvalidPenalty(penalty));
        }
        if gradient.len() != hessian.dim() {
            return Err(CubicError::DimensionMismatch {
                expected: hessian.dim(),
                got: gradient.len(),
            });
        }
        if gradient.iter().any(|x| !x.is_finite()) {
            return Err(CubicError::NonFinite);
        }
        Ok(Self {
            gradient,
            hessian,
            penalty,
        })
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.gradient
    }

    pub fn hessian(&self) -> &'a dyn SymmetricOperator {
        self.hessian
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn model_value(&self, s: &DVector<f64>) -> f64 {
        let hs = self.hessian.apply(s);
        self.model_value_with(s, &hs)
    }

    fn model_value_with(&self, s: &DVector<f64>, hs: &DVector<f64>) -> f64 {
        let r = s.norm();
        self.gradient.dot(s) + 0.5 * s.dot(hs) + self.penalty / 6.0 * r * r * r
    }

    /// `∇m(s) = g + H s + (M/2)||s|| s`.
    pub fn model_gradient(&self, s: &DVector<f64>) -> DVector<f64> {
        let hs = self.hessian.apply(s);
        self.model_gradient_with(s, &hs)
    }

    fn model_gradient_with(&self, s: &DVector<f64>, hs: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.gradient + hs;
        out.axpy(0.5 * self.penalty * s.norm(), s, 1.0);
        out
    }

    pub fn residual(&self, s: &DVector<f64>) -> f64 {
        self.model_gradient(s).norm()
    }

    /// Absolute tolerance `tol * max(1, ||g||)`.
    pub fn abs_tol(&self, tol: f64) -> f64 {
        tol * self.gradient.norm().max(1.0)
    }

    fn finish(
        &self,
        step: DVector<f64>,
        method: SolverKind,
        iterations: usize,
        tol: f64,
        min_curvature: Option<f64>,
    ) -> SubproblemSolution {
        let hs = self.hessian.apply(&step);
        let residual = self.model_gradient_with(&step, &hs).norm();
        let model_value = self.model_value_with(&step, &hs);
        SubproblemSolution {
            step_norm: step.norm(),
            converged: residual <= self.abs_tol(tol),
            step,
            residual,
            model_value,
            method,
            iterations,
            min_curvature,
            nonmonotone_steps: 0,
        }
    }
}

/// A (possibly approximate) minimizer with honest diagnostics.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub step: DVector<f64>,
    pub step_norm: f64,
    /// `||g + H s + (M/2)||s|| s||`, recomputed with the full operator.
    pub residual: f64,
    pub model_value: f64,
    pub method: SolverKind,
    /// Secular-equation iterations, Krylov dimension or descent steps.
    pub iterations: usize,
    pub converged: bool,
    /// Smallest eigenvalue (exact) or Ritz value (Krylov) seen by the solver.
    pub min_curvature: Option<f64>,
    /// Gradient-descent steps that increased the model value.
    pub nonmonotone_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance; solvers stop once the residual is below
    /// `tol * max(1, ||g||)`.
    pub tol: f64,
    /// Krylov dimension cap; defaults to `min(d, 100)`.
    pub max_krylov_dim: Option<usize>,
    pub gd_max_iters: usize,
    /// Operator-norm bound for the descent step size; estimated when absent.
    pub gd_norm_bound: Option<f64>,
    /// Seed for randomized probes in matrix-free solvers.
    pub seed: u64,
    pub dense_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_krylov_dim: None,
            gd_max_iters: 10_000,
            gd_norm_bound: None,
            seed: 0,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

/// Dispatches to the requested method.
pub fn solve(
    p: &CubicSubproblem<'_>,
    kind: SolverKind,
    opts: &SolverOptions,
) -> Result<SubproblemSolution, CubicError> {
    match kind {
        SolverKind::Exact => {
            if p.dim() > opts.dense_cap {
                return Err(CubicError::DenseCapExceeded {
                    dim: p.dim(),
                    cap: opts.dense_cap,
                });
            }
            solve_exact(p, opts.tol)
        }
        SolverKind::Krylov => {
            let max_dim = opts.max_krylov_dim.unwrap_or(100).min(p.dim());
            solve_krylov(p, opts.tol, max_dim, opts.seed)
        }
        SolverKind::GradientDescent => solve_gd(
            p,
            opts.tol,
            opts.gd_max_iters,
            opts.gd_norm_bound,
            opts.seed,
        ),
    }
}

/// Unit-norm Gaussian probe, deterministic in `seed`.
pub(crate) fn random_probe(dim: usize, seed: u64) -> DVector<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = crate::dataset::seeded_rng(seed, 0x5eed_c0de);
    loop {
        let v = DVector::<f64>::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        let n = v.norm();
        if n > 0.0 {
            return v / n;
        }
    }
}
