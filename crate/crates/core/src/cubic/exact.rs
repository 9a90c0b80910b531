use nalgebra::{DMatrix, DVector};

use super::{CubicError, CubicSubproblem, SolverKind, SubproblemSolution};
use crate::linalg::{asymmetry, densify, sorted_eigen};

const MAX_SECULAR_ITERS: usize = 500;

pub(crate) struct DenseSolution {
    pub step: DVector<f64>,
    pub iterations: usize,
    pub lambda_min: f64,
}

/// Global minimizer of the cubic model with a dense symmetric `h`.
///
/// With `H = Q Λ Q^T` and `ĝ = Q^T g`, the minimizer is
/// `s = -(H + (M/2) r I)^{-1} g` where `r >= max(0, -2 λ_min / M)` solves
/// `||s(r)|| = r`. The root is found by Newton's method on
/// `ψ(r) = 1/||s(r)|| - 1/r` inside a shrinking bisection bracket. In the hard
/// case (`ĝ` vanishes on the `λ_min` eigenspace and the remaining step is too
/// short) an eigenvector component is added, with its sign chosen so that the
/// first nonzero coordinate is positive.
pub(crate) fn solve_dense(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    penalty: f64,
) -> Result<DenseSolution, CubicError> {
    let d = g.len();
    let eig = sorted_eigen(h);
    let lam = &eig.values;
    let q = &eig.vectors;
    let mut gh = q.transpose() * g;
    let gnorm = g.norm();
    let lambda_min = lam[0];
    let spectral = lam.amax();
    let half_m = 0.5 * penalty;
    let r_low = (-lambda_min / half_m).max(0.0);

    // eigenvalues numerically tied with λ_min
    let tied = |i: usize| lam[i] - lambda_min <= 1e-12 * spectral.max(f64::MIN_POSITIVE);
    let tied_mass: f64 = (0..d)
        .filter(|&i| tied(i))
        .map(|i| gh[i] * gh[i])
        .sum::<f64>()
        .sqrt();
    let orthogonal_to_bottom = tied_mass <= 1e-12 * gnorm;
    if orthogonal_to_bottom {
        for i in (0..d).filter(|&i| tied(i)) {
            gh[i] = 0.0;
        }
    }

    let step_coords = |r: f64| -> DVector<f64> {
        DVector::from_fn(d, |i, _| {
            if gh[i] == 0.0 {
                0.0
            } else {
                -gh[i] / (lam[i] + half_m * r)
            }
        })
    };

    if gnorm == 0.0 && lambda_min >= 0.0 {
        return Ok(DenseSolution {
            step: DVector::zeros(d),
            iterations: 0,
            lambda_min,
        });
    }

    if orthogonal_to_bottom && lambda_min < 0.0 {
        let perp = step_coords(r_low);
        let pn = perp.norm();
        if pn <= r_low {
            let tau = (r_low * r_low - pn * pn).max(0.0).sqrt();
            let i0 = (0..d).find(|&i| tied(i)).unwrap_or(0);
            let mut coords = perp;
            coords[i0] += tau;
            let mut step = q * coords;
            // sign tie-break on the eigenvector component
            let u = q.column(i0);
            if let Some(j) = u.iter().position(|x| x.abs() > 1e-12) {
                if u[j] < 0.0 {
                    step.axpy(-2.0 * tau, &u.into_owned(), 1.0);
                }
            }
            return Ok(DenseSolution {
                step: polish(h, g, half_m, step),
                iterations: 0,
                lambda_min,
            });
        }
    }

    // ||s(r)|| and its derivative
    let norms = |r: f64| -> (f64, f64) {
        let (mut sq, mut cube) = (0.0, 0.0);
        for i in 0..d {
            if gh[i] != 0.0 {
                let den = lam[i] + half_m * r;
                let t = gh[i] * gh[i] / (den * den);
                sq += t;
                cube += t / den;
            }
        }
        let ns = sq.sqrt();
        (ns, if ns > 0.0 { -half_m * cube / ns } else { 0.0 })
    };

    let bm = spectral / penalty;
    let mut hi =
        (bm + (bm * bm + 2.0 * gnorm / penalty).sqrt()) * (1.0 + 1e-10) + f64::MIN_POSITIVE;
    let mut grow = 0;
    while norms(hi).0 > hi {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(CubicError::Secular(format!(
                "no upper bracket: r_low = {r_low:e}, ||g|| = {gnorm:e}, λ_min = {lambda_min:e}"
            )));
        }
    }
    let mut lo = r_low;
    let mut r = hi;
    let mut iterations = 0;
    while iterations < MAX_SECULAR_ITERS {
        iterations += 1;
        let (ns, dns) = norms(r);
        if ns > r {
            lo = r;
        } else {
            hi = r;
        }
        if (ns - r).abs() <= 2.0 * f64::EPSILON * r || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let psi = 1.0 / ns - 1.0 / r;
        let dpsi = -dns / (ns * ns) + 1.0 / (r * r);
        let newton = r - psi / dpsi;
        r = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(CubicError::Secular(format!(
            "root finding diverged: bracket [{lo:e}, {hi:e}], r = {r:e}"
        )));
    }
    Ok(DenseSolution {
        step: polish(h, g, half_m, q * step_coords(r)),
        iterations,
        lambda_min,
    })
}

fn stationarity_residual(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    half_m: f64,
    s: &DVector<f64>,
) -> DVector<f64> {
    g + h * s + s * (half_m * s.norm())
}

/// Newton refinement of `g + H s + (M/2)||s|| s = 0` in the original basis.
///
/// Eigenvector roundoff is amplified by `1 / (λ_min + M r / 2)` near the hard
/// case; a few corrections recover the lost digits. Steps that do not reduce
/// the residual are discarded.
fn polish(h: &DMatrix<f64>, g: &DVector<f64>, half_m: f64, mut s: DVector<f64>) -> DVector<f64> {
    let d = s.len();
    let mut res = stationarity_residual(h, g, half_m, &s);
    for _ in 0..3 {
        let r = s.norm();
        let rn = res.norm();
        if r == 0.0 || rn == 0.0 {
            break;
        }
        let jac =
            h + DMatrix::<f64>::identity(d, d) * (half_m * r) + &s * s.transpose() * (half_m / r);
        let Some(delta) = jac.lu().solve(&res) else {
            break;
        };
        let cand = &s - delta;
        let cand_res = stationarity_residual(h, g, half_m, &cand);
        if cand_res.norm().is_nan() || cand_res.norm() >= rn {
            break;
        }
        s = cand;
        res = cand_res;
    }
    s
}

/// Global minimizer via eigendecomposition and the secular equation.
///
/// Requires the operator to be representable densely (it is materialized
/// column by column when it has no dense form of its own).
pub fn solve_exact(p: &CubicSubproblem<'_>, tol: f64) -> Result<SubproblemSolution, CubicError> {
    let h = densify(p.hessian());
    let asym = asymmetry(&h);
    if asym > 1e-10 * h.amax().max(1.0) {
        return Err(CubicError::NonSymmetric { asymmetry: asym });
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(CubicError::NonFinite);
    }
    let sol = solve_dense(&h, p.gradient(), p.penalty())?;
    Ok(p.finish(
        sol.step,
        SolverKind::Exact,
        sol.iterations,
        tol,
        Some(sol.lambda_min),
    ))
}
