use nalgebra::DVector;

use super::{Objective, ObjectiveError};

/// Central-difference check of analytic derivatives at one point.
///
/// Errors are `||fd - analytic||_inf / max(1, ||analytic||_inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub step: f64,
    pub gradient_error: f64,
    pub hessian_vector_error: f64,
}

impl AuditReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.gradient_error <= tol && self.hessian_vector_error <= tol
    }
}

fn relative_error(fd: &DVector<f64>, exact: &DVector<f64>) -> f64 {
    (fd - exact).amax() / exact.amax().max(1.0)
}

/// Audits `gradient` against differenced values and `hessian_vector` against
/// differenced gradients. `step` defaults to `1e-4 (1 + ||w||)`.
pub fn finite_difference_audit(
    problem: &dyn Objective,
    w: &DVector<f64>,
    step: Option<f64>,
) -> Result<AuditReport, ObjectiveError> {
    let h = step.unwrap_or(1e-4 * (1.0 + w.norm()));
    assert!(h > 0.0, "finite-difference step must be positive");
    let d = problem.dim();
    let grad = problem.gradient(w)?;

    let mut fd_grad = DVector::zeros(d);
    let mut probe = w.clone();
    for i in 0..d {
        probe[i] = w[i] + h;
        let up = problem.value(&probe)?;
        probe[i] = w[i] - h;
        let down = problem.value(&probe)?;
        probe[i] = w[i];
        fd_grad[i] = (up - down) / (2.0 * h);
    }

    // fixed full-support direction
    let v = DVector::from_fn(
        d,
        |i, _| if i % 2 == 0 { 1.0 } else { -0.5 } / (1.0 + i as f64).sqrt(),
    )
    .normalize();
    let hv = problem.hessian_vector(w, &v)?;
    let up = problem.gradient(&(w + &v * h))?;
    let down = problem.gradient(&(w - &v * h))?;
    let fd_hv = (up - down) / (2.0 * h);

    Ok(AuditReport {
        step: h,
        gradient_error: relative_error(&fd_grad, &grad),
        hessian_vector_error: relative_error(&fd_hv, &hv),
    })
}
