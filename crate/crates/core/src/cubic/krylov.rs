use nalgebra::DVector;

use super::exact::solve_dense;
use super::{random_probe, CubicError, CubicSubproblem, SolverKind, SubproblemSolution};
use crate::linalg::{sorted_eigen, Lanczos};

/// Lanczos subspace solver.
///
/// Builds the Krylov space of `H` started at `g` and solves each projected
/// tridiagonal problem exactly. The full residual is
/// `sqrt(||r_reduced||² + (β_k s_k)²)`, so no extra operator applications are
/// needed until the lifted step is checked at the end. At `g = 0` the space is
/// started from a seeded random probe and grown until the lowest Ritz pair has
/// converged, which lets the solver escape strict saddles.
pub fn solve_krylov(
    p: &CubicSubproblem<'_>,
    tol: f64,
    max_dim: usize,
    seed: u64,
) -> Result<SubproblemSolution, CubicError> {
    let d = p.dim();
    let gnorm = p.gradient().norm();
    let abs_tol = p.abs_tol(tol);
    let zero_grad = gnorm == 0.0;
    let max_dim = max_dim.clamp(1, d.max(1));
    let start = if zero_grad {
        random_probe(d, seed)
    } else {
        p.gradient().clone()
    };

    let mut lz = Lanczos::new(p.hessian(), &start);
    let mut reduced = DVector::zeros(0);
    let mut min_ritz = f64::NAN;
    while lz.extend() {
        let t = lz.tridiagonal();
        let k = lz.dim();
        let mut g_red = DVector::zeros(k);
        g_red[0] = gnorm;
        let sol = solve_dense(&t, &g_red, p.penalty())?;
        let s = sol.step;
        let mut r = &g_red + &t * &s;
        r.axpy(0.5 * p.penalty() * s.norm(), &s, 1.0);
        let tail = lz.last_beta() * s[k - 1];
        let estimate = (r.norm_squared() + tail * tail).sqrt();
        min_ritz = sol.lambda_min;

        let mut done = estimate <= abs_tol;
        if zero_grad {
            let eig = sorted_eigen(&t);
            let ritz_residual = lz.last_beta() * eig.vectors[(k - 1, 0)].abs();
            done = done && ritz_residual <= abs_tol * eig.values.amax().max(1.0);
        }
        reduced = s;
        if done || lz.exhausted() || k >= max_dim {
            break;
        }
    }
    let step = lz.lift(&reduced);
    Ok(p.finish(step, SolverKind::Krylov, lz.dim(), tol, Some(min_ritz)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::solve_exact;
    use nalgebra::DMatrix;

    #[test]
    fn matches_exact_on_indefinite_matrix() {
        let a = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let h = &a + a.transpose();
        let g = DVector::from_fn(6, |i, _| 1.0 / (1.0 + i as f64));
        let p = CubicSubproblem::new(g, &h, 3.0).unwrap();
        let k = solve_krylov(&p, 1e-10, 6, 0).unwrap();
        let e = solve_exact(&p, 1e-10).unwrap();
        assert!(k.converged, "residual {}", k.residual);
        assert!((k.model_value - e.model_value).abs() <= 1e-9 * e.model_value.abs().max(1.0));
    }

    #[test]
    fn escapes_saddle_from_zero_gradient() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 2.0]));
        let p = CubicSubproblem::new(DVector::zeros(3), &h, 2.0).unwrap();
        let sol = solve_krylov(&p, 1e-8, 3, 7).unwrap();
        assert!((sol.step[0].abs() - 1.0).abs() < 1e-8);
        assert!((sol.model_value + 1.0 / 6.0).abs() < 1e-8);
    }

    #[test]
    fn zero_gradient_convex_gives_zero_step() {
        let h = DMatrix::<f64>::identity(4, 4);
        let p = CubicSubproblem::new(DVector::zeros(4), &h, 1.0).unwrap();
        let sol = solve_krylov(&p, 1e-8, 4, 0).unwrap();
        assert_eq!(sol.step_norm, 0.0);
    }
}
