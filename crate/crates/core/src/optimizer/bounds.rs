//! Per-step guarantees of an (in)exact cubic step, as checkable inequalities.
//!
//! For a step `s` from `x` to `y = x + s` with Hessian-Lipschitz constant `L2`,
//! penalty `M` and Hessian error `eps1` (0 for the exact Hessian):
//!
//! * `f(y) - f(x) <= -((3M - 2 L2)/12) ||s||³ + (1/2) ||s||² eps1`
//! * `||∇f(y)|| <= ((L2 + M)/2) ||s||² + eps1 ||s||`
//! * `λ_min(∇²f(y)) >= -((M + 2 L2)/2) ||s|| - eps1`

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBounds {
    pub l2: f64,
    pub penalty: f64,
    pub eps1: f64,
}

/// Observed quantities around one cubic step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepObservation {
    pub step_norm: f64,
    pub f_before: f64,
    pub f_after: f64,
    pub grad_norm_after: f64,
    pub lambda_min_after: f64,
}

/// Signed slack of each inequality; a negative entry is a violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSlack {
    pub descent: f64,
    pub gradient: f64,
    pub eigenvalue: f64,
}

impl BoundSlack {
    pub fn holds(&self, tol: f64) -> bool {
        self.descent >= -tol && self.gradient >= -tol && self.eigenvalue >= -tol
    }
}

impl StepBounds {
    pub fn exact(l2: f64, penalty: f64) -> Self {
        Self {
            l2,
            penalty,
            eps1: 0.0,
        }
    }

    pub fn descent_limit(&self, r: f64) -> f64 {
        -(3.0 * self.penalty - 2.0 * self.l2) / 12.0 * r * r * r + 0.5 * r * r * self.eps1
    }

    pub fn gradient_limit(&self, r: f64) -> f64 {
        0.5 * (self.l2 + self.penalty) * r * r + self.eps1 * r
    }

    pub fn eigenvalue_limit(&self, r: f64) -> f64 {
        -0.5 * (self.penalty + 2.0 * self.l2) * r - self.eps1
    }

    pub fn slack(&self, obs: &StepObservation) -> BoundSlack {
        let r = obs.step_norm;
        BoundSlack {
            descent: self.descent_limit(r) - (obs.f_after - obs.f_before),
            gradient: self.gradient_limit(r) - obs.grad_norm_after,
            eigenvalue: obs.lambda_min_after - self.eigenvalue_limit(r),
        }
    }
}
