use nalgebra::DVector;

use super::{random_probe, CubicError, CubicSubproblem, SolverKind, SubproblemSolution};
use crate::linalg::{power_iteration_norm, FnOperator, SymmetricOperator};

const POWER_ITERS: usize = 300;

/// Gradient descent on the cubic model.
///
/// Uses the fixed step `1 / (4 (B + M R))` where `B >= ||H||` and
/// `R = B/M + sqrt((B/M)² + 2||g||/M)` bounds the minimizer's norm, starting
/// from the Cauchy point along `-g`. At `g = 0` a shifted power iteration looks
/// for a negative-curvature direction; if none is found the zero step is
/// returned. Steps that increase the model value beyond roundoff are counted,
/// not rejected.
pub fn solve_gd(
    p: &CubicSubproblem<'_>,
    tol: f64,
    max_iters: usize,
    norm_bound: Option<f64>,
    seed: u64,
) -> Result<SubproblemSolution, CubicError> {
    let d = p.dim();
    let h = p.hessian();
    let m = p.penalty();
    let g = p.gradient();
    let gnorm = g.norm();
    let abs_tol = p.abs_tol(tol);
    let probe = random_probe(d, seed);
    let bound = match norm_bound {
        Some(b) if b.is_finite() && b >= 0.0 => b,
        Some(_) => return Err(CubicError::NonFinite),
        // power iteration approaches from below
        None => 1.1 * power_iteration_norm(h, &probe, POWER_ITERS),
    };

    let mut s = if gnorm > 0.0 {
        let u = g / gnorm;
        let kappa = u.dot(&h.apply(&u));
        let t = (-kappa + (kappa * kappa + 2.0 * m * gnorm).sqrt()) / m;
        u * (-t)
    } else {
        let shifted = FnOperator::new(d, |v: &DVector<f64>| v * bound - h.apply(v));
        let u = dominant_direction(&shifted, &probe);
        let kappa = u.dot(&h.apply(&u));
        if kappa >= -abs_tol {
            return Ok(p.finish(
                DVector::zeros(d),
                SolverKind::GradientDescent,
                0,
                tol,
                Some(kappa),
            ));
        }
        u * (-2.0 * kappa / m)
    };

    let bm = bound / m;
    let radius = bm + (bm * bm + 2.0 * gnorm / m).sqrt();
    let eta = 1.0 / (4.0 * (bound + m * radius));
    let mut nonmonotone = 0;
    let mut iterations = 0;
    let mut prev_value = p.model_value(&s);
    while iterations < max_iters {
        let grad = p.model_gradient(&s);
        if grad.norm() <= abs_tol {
            break;
        }
        s.axpy(-eta, &grad, 1.0);
        iterations += 1;
        let value = p.model_value(&s);
        // ignore evaluation roundoff
        if value > prev_value + 1e-14 * (1.0 + prev_value.abs()) {
            nonmonotone += 1;
        }
        prev_value = value;
    }
    let mut sol = p.finish(s, SolverKind::GradientDescent, iterations, tol, None);
    sol.nonmonotone_steps = nonmonotone;
    Ok(sol)
}

/// Unit eigenvector estimate of the dominant eigenvalue of a PSD operator.
fn dominant_direction(op: &dyn SymmetricOperator, start: &DVector<f64>) -> DVector<f64> {
    let mut v = start.normalize();
    let mut last = 0.0;
    for _ in 0..POWER_ITERS {
        let w = op.apply(&v);
        let n = w.norm();
        if n == 0.0 {
            break;
        }
        v = w / n;
        if (n - last).abs() <= 1e-12 * n {
            break;
        }
        last = n;
    }
    v
}
