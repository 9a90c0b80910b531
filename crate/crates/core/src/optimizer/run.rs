use std::cell::Cell;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::stationarity::estimate_lambda_min;
use super::steps::{momentum_coefficient, momentum_point, monotone_select, Accepted};
use super::{
    AlgoConfig, Algorithm, Counters, IterationRecord, OptimizerError, StationarityVerdict,
    TerminalStatus, Trace,
};
use crate::cubic::{self, CubicSubproblem, SubproblemSolution};
use crate::linalg::SymmetricOperator;
use crate::objectives::{FiniteSum, Objective, ObjectiveError};
use crate::subsampling::{
    draw_iteration_batch, inexact_termination, InexactConfig, SubsampledHessian, SubsamplingError,
};

const LAMBDA_TOL: f64 = 1e-8;

/// Counts operator applications.
struct Counted<'a> {
    inner: &'a dyn SymmetricOperator,
    count: &'a Cell<usize>,
}

impl SymmetricOperator for Counted<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        self.inner.apply(v)
    }

    fn dense(&self) -> Option<DMatrix<f64>> {
        self.inner.dense()
    }
}

enum HessianSource<'a> {
    Exact,
    Sampled { fs: &'a dyn FiniteSum, size: usize },
}

struct Runner<'a> {
    oracle: &'a dyn Objective,
    config: &'a AlgoConfig,
    source: HessianSource<'a>,
    eps1: Option<(f64, bool)>,
    hvps: Cell<usize>,
    counters: Counters,
    warnings: Vec<String>,
    start: Instant,
}

impl<'a> Runner<'a> {
    fn value(&mut self, x: &DVector<f64>) -> Result<f64, ObjectiveError> {
        self.counters.function_evals += 1;
        self.oracle.value(x)
    }

    fn gradient(&mut self, x: &DVector<f64>) -> Result<DVector<f64>, ObjectiveError> {
        self.counters.gradient_evals += 1;
        self.oracle.gradient(x)
    }

    fn full_samples(&self) -> usize {
        self.oracle.as_finite_sum().map_or(0, |fs| fs.num_samples())
    }

    /// Solves the cubic model at `x`; returns the solution and samples used.
    fn cubic_step(
        &mut self,
        k: usize,
        x: &DVector<f64>,
        g: &DVector<f64>,
    ) -> Result<(SubproblemSolution, usize), String> {
        let (op, samples): (Box<dyn SymmetricOperator + '_>, usize) = match self.source {
            HessianSource::Exact => (
                self.oracle.hessian_at(x).map_err(|e| e.to_string())?,
                self.full_samples(),
            ),
            HessianSource::Sampled { fs, size } => {
                let batch =
                    draw_iteration_batch(fs.num_samples(), size, self.config.seed, k as u64)
                        .map_err(|e| e.to_string())?;
                let h = SubsampledHessian::new(fs, x, &batch).map_err(|e| e.to_string())?;
                (Box::new(h), size)
            }
        };
        let counted = Counted {
            inner: &*op,
            count: &self.hvps,
        };
        let sub = CubicSubproblem::new(g.clone(), &counted, self.config.penalty)
            .map_err(|e| e.to_string())?;
        let mut opts = self.config.solver_options;
        opts.seed = self.config.seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let sol = cubic::solve(&sub, self.config.solver, &opts).map_err(|e| e.to_string())?;
        self.counters.hessian_samples += samples;
        Ok((sol, samples))
    }

    /// `λ_min` of the exact Hessian at `x`, with a warning when unconverged.
    fn lambda_min(&mut self, k: usize, x: &DVector<f64>) -> Result<f64, ObjectiveError> {
        let h = self.oracle.hessian_at(x)?;
        let counted = Counted {
            inner: &*h,
            count: &self.hvps,
        };
        let est = estimate_lambda_min(
            &counted,
            LAMBDA_TOL,
            self.config.seed.wrapping_add(k as u64),
        );
        if !est.converged {
            self.warnings
                .push(format!("iteration {k}: λ_min estimate did not converge"));
        }
        Ok(est.value)
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Runs `algorithm` from `x0`.
///
/// Configuration and starting-point errors are returned as `Err`. Failures
/// during the run (a subproblem error, a non-finite evaluation, or
/// `max_solver_failures` consecutive unconverged subproblems) end the run with
/// [`TerminalStatus::Aborted`] and a warning, keeping the partial trace.
pub fn run(
    algorithm: Algorithm,
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    config: &AlgoConfig,
    inexact: Option<&InexactConfig>,
) -> Result<Trace, OptimizerError> {
    config.validate()?;
    let lip = oracle.lipschitz();
    let mut warnings = Vec::new();
    let (source, eps1, batch_size, batch_clamped) = match inexact {
        None => (HessianSource::Exact, None, None, false),
        Some(ic) => {
            ic.validate()?;
            let fs = oracle
                .as_finite_sum()
                .ok_or(SubsamplingError::NotFiniteSum)?;
            let n = fs.num_samples();
            let (size, clamped) = ic.batch_size(lip.l1, config.eps, oracle.dim(), n);
            if clamped {
                warnings.push(format!("batch size clamped to n = {n}"));
            }
            let threshold3 = 2.0 * lip.l2 / 3.0 + 2.0;
            let threshold4 = lip.l2 + 2.0;
            if lip.provenance != crate::objectives::Provenance::Unknown {
                if config.penalty <= threshold3 {
                    warnings.push(format!(
                        "M = {} is not above 2 L2/3 + 2 = {threshold3}",
                        config.penalty
                    ));
                }
                if config.penalty <= threshold4 {
                    warnings.push(format!(
                        "M = {} is not above L2 + 2 = {threshold4}",
                        config.penalty
                    ));
                }
            }
            let acc = ic.accuracy(config.eps);
            (
                HessianSource::Sampled { fs, size },
                Some((acc, ic.step_norm_stop)),
                Some(size),
                clamped,
            )
        }
    };
    if inexact.is_none()
        && lip.provenance != crate::objectives::Provenance::Unknown
        && config.penalty <= lip.l2
    {
        warnings.push(format!(
            "M = {} is not above L2 = {}",
            config.penalty, lip.l2
        ));
    }

    let mut runner = Runner {
        oracle,
        config,
        source,
        eps1,
        hvps: Cell::new(0),
        counters: Counters::default(),
        warnings,
        start: Instant::now(),
    };
    let f0 = runner.value(x0)?;
    let g0 = runner.gradient(x0)?;
    if !f0.is_finite() {
        return Err(OptimizerError::InvalidConfig(format!(
            "f(x0) is not finite: {f0}"
        )));
    }
    let mut trace = Trace {
        algorithm,
        inexact: inexact.is_some(),
        records: Vec::new(),
        iterates: vec![x0.clone()],
        cubic_points: Vec::new(),
        initial_value: f0,
        initial_grad_norm: g0.norm(),
        status: TerminalStatus::MaxIters,
        verdict: None,
        counters: Counters::default(),
        batch_size,
        batch_clamped,
        warnings: Vec::new(),
    };

    if g0.norm() <= config.eps {
        let lam = runner.lambda_min(0, x0)?;
        let v = StationarityVerdict::new(g0.norm(), lam, config.eps);
        trace.verdict = Some(v);
        if v.pass {
            trace.status = TerminalStatus::StationaryPass;
            return Ok(finish(trace, runner));
        }
    }

    let result = match algorithm {
        Algorithm::Cr | Algorithm::Crm => monotone_loop(&mut runner, &mut trace, algorithm, g0),
        Algorithm::Cra => accelerated_loop(&mut runner, &mut trace, g0),
    };
    if let Err(msg) = result {
        trace.status = TerminalStatus::Aborted;
        runner.warnings.push(msg);
    }
    Ok(finish(trace, runner))
}

fn finish(mut trace: Trace, runner: Runner<'_>) -> Trace {
    trace.counters = runner.counters;
    trace.counters.hessian_vector_products = runner.hvps.get();
    trace.warnings = runner.warnings;
    trace
}

struct Outcome {
    stop: Option<TerminalStatus>,
    verdict: Option<StationarityVerdict>,
    lambda: f64,
}

/// Shared end-of-iteration bookkeeping: failure streak, stationarity and the
/// step-norm proxy.
fn assess(
    runner: &mut Runner<'_>,
    k: usize,
    x_new: &DVector<f64>,
    grad_norm: f64,
    sol: &SubproblemSolution,
    failures: &mut usize,
) -> Result<Outcome, String> {
    let config = runner.config;
    if sol.converged {
        *failures = 0;
    } else {
        *failures += 1;
        runner.warnings.push(format!(
            "iteration {k}: subproblem not converged (residual {:e})",
            sol.residual
        ));
    }
    let mut out = Outcome {
        stop: None,
        verdict: None,
        lambda: f64::NAN,
    };
    if grad_norm <= config.eps || config.track_lambda_min {
        out.lambda = runner.lambda_min(k + 1, x_new).map_err(|e| e.to_string())?;
        let v = StationarityVerdict::new(grad_norm, out.lambda, config.eps);
        out.verdict = Some(v);
    }
    if let Some((eps1, true)) = runner.eps1 {
        if inexact_termination(sol.step_norm, eps1) {
            out.stop = Some(TerminalStatus::StepNormTermination);
            return Ok(out);
        }
    }
    if out
        .verdict
        .is_some_and(|v| v.pass && grad_norm <= config.eps)
    {
        out.stop = Some(TerminalStatus::StationaryPass);
    } else if *failures >= config.max_solver_failures {
        runner.warnings.push(format!(
            "aborted after {failures} consecutive unconverged subproblems"
        ));
        out.stop = Some(TerminalStatus::Aborted);
    }
    Ok(out)
}

fn monotone_loop(
    runner: &mut Runner<'_>,
    trace: &mut Trace,
    algorithm: Algorithm,
    g0: DVector<f64>,
) -> Result<(), String> {
    let config = runner.config;
    let mut x = trace.iterates[0].clone();
    let mut gx = g0;
    let mut y_prev = x.clone();
    let mut failures = 0;
    for k in 0..config.max_iters {
        let (sol, samples) = runner.cubic_step(k, &x, &gx)?;
        let y = &x + &sol.step;
        let fy = runner
            .value(&y)
            .map_err(|e| format!("iteration {k}: f(y): {e}"))?;
        let gy = runner
            .gradient(&y)
            .map_err(|e| format!("iteration {k}: ∇f(y): {e}"))?;
        if !fy.is_finite() {
            return Err(format!("iteration {k}: f(y) is not finite"));
        }

        let (x_new, f_new, g_new, beta, accepted) = match algorithm {
            Algorithm::Crm => {
                let beta =
                    momentum_coefficient(gy.norm(), sol.step_norm, config.rho, config.momentum);
                let v = momentum_point(&y, &y_prev, beta);
                let fv = match runner.value(&v) {
                    Ok(fv) => fv,
                    Err(e) => {
                        runner
                            .warnings
                            .push(format!("iteration {k}: f(v) failed: {e}"));
                        f64::NAN
                    }
                };
                if !fv.is_finite() {
                    runner
                        .warnings
                        .push(format!("iteration {k}: f(v) not finite, keeping y"));
                }
                match monotone_select(fy, fv) {
                    Accepted::Momentum => {
                        let gv = runner
                            .gradient(&v)
                            .map_err(|e| format!("iteration {k}: ∇f(v): {e}"))?;
                        (v, fv, gv, beta, Accepted::Momentum)
                    }
                    Accepted::Cubic => (y.clone(), fy, gy, beta, Accepted::Cubic),
                }
            }
            _ => (y.clone(), fy, gy, 0.0, Accepted::Cubic),
        };

        let grad_norm = g_new.norm();
        let out = assess(runner, k, &x_new, grad_norm, &sol, &mut failures)?;
        trace.records.push(IterationRecord {
            iter: k,
            wall_time_s: runner.elapsed(),
            f_value: f_new,
            grad_norm,
            step_norm: sol.step_norm,
            beta,
            accepted,
            lambda_min_est: out.lambda,
            solver_residual: sol.residual,
            hessian_samples: samples,
        });
        trace.iterates.push(x_new.clone());
        trace.cubic_points.push(y.clone());
        if out.verdict.is_some() {
            trace.verdict = out.verdict;
        }
        y_prev = y;
        x = x_new;
        gx = g_new;
        if let Some(status) = out.stop {
            trace.status = status;
            return Ok(());
        }
    }
    trace.status = TerminalStatus::MaxIters;
    Ok(())
}

fn accelerated_loop(
    runner: &mut Runner<'_>,
    trace: &mut Trace,
    g0: DVector<f64>,
) -> Result<(), String> {
    let config = runner.config;
    let n_scale = 6.0 * config.penalty;
    let x0 = trace.iterates[0].clone();
    let mut x = x0.clone();
    let mut linear: DVector<f64> = DVector::zeros(x0.len());
    let mut failures = 0;
    for k in 0..config.max_iters {
        let (y, gy, beta) = if k == 0 {
            (x0.clone(), g0.clone(), 0.0)
        } else {
            let ln = linear.norm();
            let v = if ln > 0.0 {
                &x0 - &linear * (2.0 / (n_scale * ln)).sqrt()
            } else {
                x0.clone()
            };
            let kf = k as f64;
            let mix = 3.0 / (kf + 3.0);
            let y = &x * (kf / (kf + 3.0)) + &v * mix;
            let gy = runner
                .gradient(&y)
                .map_err(|e| format!("iteration {k}: ∇f(y): {e}"))?;
            (y, gy, mix)
        };
        let (sol, samples) = runner.cubic_step(k, &y, &gy)?;
        let x_new = &y + &sol.step;
        let f_new = runner
            .value(&x_new)
            .map_err(|e| format!("iteration {k}: f: {e}"))?;
        let g_new = runner
            .gradient(&x_new)
            .map_err(|e| format!("iteration {k}: ∇f: {e}"))?;
        if !f_new.is_finite() {
            return Err(format!("iteration {k}: f is not finite"));
        }
        if k > 0 {
            let kf = k as f64;
            linear.axpy(0.5 * (kf + 1.0) * (kf + 2.0), &g_new, 1.0);
        }
        let grad_norm = g_new.norm();
        let out = assess(runner, k, &x_new, grad_norm, &sol, &mut failures)?;
        trace.records.push(IterationRecord {
            iter: k,
            wall_time_s: runner.elapsed(),
            f_value: f_new,
            grad_norm,
            step_norm: sol.step_norm,
            beta,
            accepted: Accepted::Cubic,
            lambda_min_est: out.lambda,
            solver_residual: sol.residual,
            hessian_samples: samples,
        });
        trace.iterates.push(x_new.clone());
        trace.cubic_points.push(x_new.clone());
        if out.verdict.is_some() {
            trace.verdict = out.verdict;
        }
        x = x_new;
        if let Some(status) = out.stop {
            trace.status = status;
            return Ok(());
        }
    }
    trace.status = TerminalStatus::MaxIters;
    Ok(())
}
