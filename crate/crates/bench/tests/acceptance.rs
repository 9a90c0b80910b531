//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use crm_bench::series::{gap_series, grad_series};
use crm_bench::trace_io::{read_trace_csv, HEADER};
use crm_core::cubic::{solve_exact, solve_gd, solve_krylov, CubicSubproblem, SolverKind};
use crm_core::dataset::{seeded_rng, synthesize_classification, synthesize_regression};
use crm_core::linalg::sorted_eigen;
use crm_core::objectives::{
    finite_difference_audit, LogisticRegressionProblem, Objective, RobustRegressionProblem,
    SyntheticProblem,
};
use crm_core::optimizer::{
    measure_quadratic_rate, run, stationarity_check, AlgoConfig, Algorithm, MomentumMode,
    RateVerdict, StepBounds, StepObservation, Trace,
};
use crm_core::subsampling::{per_iteration_batch_size, InexactConfig, SubsampledHessian};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gaussian_vec(rng: &mut impl Rng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| {
        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
    })
}

/// Symmetric matrix with eigenvalues drawn uniformly from `[-5, 5]`.
fn random_symmetric(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let q = a.qr().q();
    let lam = DVector::<f64>::from_fn(d, |_, _| rng.random_range(-5.0..=5.0));
    let h: DMatrix<f64> = &q * DMatrix::from_diagonal(&lam) * q.transpose();
    (&h + h.transpose()) * 0.5
}

fn exact_config(eps: f64, max_iters: usize) -> AlgoConfig {
    AlgoConfig {
        solver: SolverKind::Exact,
        eps,
        max_iters,
        ..AlgoConfig::default()
    }
}

fn nonconvex_logistic(n: usize, d: usize, seed: u64) -> LogisticRegressionProblem {
    LogisticRegressionProblem::new(Arc::new(synthesize_classification(n, d, seed)), 0.1)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(2024, 0);
    let mut worst_k: f64 = 0.0;
    let mut worst_gd: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for i in 0..200 {
        let d = 1 + i % 20;
        let penalty = [1.0, 2.0, 10.0][i % 3];
        let h = random_symmetric(&mut rng, d);
        let g = gaussian_vec(&mut rng, d);
        let p = CubicSubproblem::new(g.clone(), &h, penalty).map_err(|e| e.to_string())?;
        let ex = solve_exact(&p, 1e-10).map_err(|e| e.to_string())?;
        let kr = solve_krylov(&p, 1e-10, d, i as u64).map_err(|e| e.to_string())?;
        let gd = solve_gd(&p, 1e-8, 10_000, None, i as u64).map_err(|e| e.to_string())?;
        let scale = 1.0 + ex.model_value.abs();
        worst_k = worst_k.max((kr.model_value - ex.model_value).abs() / scale);
        worst_gd = worst_gd.max((gd.model_value - ex.model_value).abs() / scale);
        worst_res = worst_res.max(ex.residual / g.norm().max(1.0));
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "krylov gap {worst_k:.2e}, gd gap {worst_gd:.2e}, exact residual {worst_res:.2e}, {secs:.2}s"
    );
    ensure(
        worst_k <= 1e-6 && worst_gd <= 1e-6 && worst_res <= 1e-10 && secs < 10.0,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn criterion_2() -> Outcome {
    let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0]));
    let p = CubicSubproblem::new(DVector::zeros(2), &h, 2.0).map_err(|e| e.to_string())?;
    let ex = solve_exact(&p, 1e-10).map_err(|e| e.to_string())?;
    let kr = solve_krylov(&p, 1e-10, 2, 0).map_err(|e| e.to_string())?;
    let gd = solve_gd(&p, 1e-8, 10_000, None, 0).map_err(|e| e.to_string())?;
    let target = -1.0 / 6.0;
    let detail = format!(
        "exact ||s|| = {:.12}, m = {:.12}; krylov m = {:.12}; gd m = {:.12}",
        ex.step_norm, ex.model_value, kr.model_value, gd.model_value
    );
    ensure(
        (ex.step_norm - 1.0).abs() <= 1e-8
            && (ex.model_value - target).abs() <= 1e-8
            && kr.model_value <= target + 1e-6
            && gd.model_value <= target + 1e-6,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn criterion_3() -> Outcome {
    let p = SyntheticProblem::strict_saddle_quartic();
    let l2 = p.lipschitz().l2;
    let bounds = StepBounds::exact(l2, 10.0);
    let mut rng = seeded_rng(3, 0);
    let mut violations = 0;
    let mut checked = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..20 {
        let x: f64 = rng.random_range(-std::f64::consts::SQRT_2..=std::f64::consts::SQRT_2);
        let ymax = (x * x - x.powi(4) / 2.0).max(0.0).sqrt();
        let y: f64 = rng.random_range(-ymax..=ymax);
        let x0 = DVector::from_vec(vec![x, y]);
        for algo in [Algorithm::Cr, Algorithm::Crm] {
            let t = run(algo, &p, &x0, &exact_config(f64::MIN_POSITIVE, 50), None)
                .map_err(|e| e.to_string())?;
            for (k, yk) in t.cubic_points.iter().enumerate() {
                let xk = &t.iterates[k];
                let h = p.full_hessian(yk).map_err(|e| e.to_string())?;
                let obs = StepObservation {
                    step_norm: (yk - xk).norm(),
                    f_before: p.value(xk).map_err(|e| e.to_string())?,
                    f_after: p.value(yk).map_err(|e| e.to_string())?,
                    grad_norm_after: p.gradient(yk).map_err(|e| e.to_string())?.norm(),
                    lambda_min_after: sorted_eigen(&h).values[0],
                };
                let s = bounds.slack(&obs);
                min_slack = min_slack.min(s.descent).min(s.gradient).min(s.eigenvalue);
                checked += 1;
                if !s.holds(1e-9) {
                    violations += 1;
                }
            }
        }
    }
    let detail = format!("{violations} violations over {checked} steps, min slack {min_slack:.3e}");
    ensure(violations == 0, || detail.clone())?;
    Ok(detail)
}

fn monotone(t: &Trace) -> bool {
    let mut prev = t.initial_value;
    for r in &t.records {
        if r.f_value > prev + 1e-12 * (1.0 + prev.abs()) {
            return false;
        }
        prev = r.f_value;
    }
    true
}

fn same_iterates(a: &Trace, b: &Trace) -> bool {
    a.iterates.len() == b.iterates.len()
        && a.iterates.iter().zip(&b.iterates).all(|(x, y)| x == y)
        && a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(r, s)| {
            r.f_value.to_bits() == s.f_value.to_bits()
                && r.grad_norm.to_bits() == s.grad_norm.to_bits()
                && r.step_norm.to_bits() == s.step_norm.to_bits()
        })
}

fn criterion_4() -> Outcome {
    let problems: Vec<(&str, Box<dyn Objective>, DVector<f64>)> = vec![
        (
            "quadratic-1d",
            Box::new(SyntheticProblem::quadratic_1d()),
            DVector::from_element(1, 1.0),
        ),
        (
            "strict-saddle-quartic",
            Box::new(SyntheticProblem::strict_saddle_quartic()),
            DVector::from_vec(vec![0.3, -0.2]),
        ),
        (
            "convex-logistic",
            Box::new(SyntheticProblem::convex_logistic(200, 10, 0, 1.0)),
            DVector::from_element(10, 2.0),
        ),
        (
            "logreg",
            Box::new(nonconvex_logistic(300, 10, 1)),
            DVector::from_element(10, 2.0),
        ),
        (
            "robust",
            Box::new(RobustRegressionProblem::new(Arc::new(
                synthesize_regression(300, 10, 1),
            ))),
            DVector::from_element(10, 0.5),
        ),
    ];
    let mut runs = 0;
    for (name, p, x0) in &problems {
        let cfg = AlgoConfig {
            eps: 1e-8,
            max_iters: 200,
            ..AlgoConfig::default()
        };
        let cr = run(Algorithm::Cr, p.as_ref(), x0, &cfg, None).map_err(|e| e.to_string())?;
        let crm = run(Algorithm::Crm, p.as_ref(), x0, &cfg, None).map_err(|e| e.to_string())?;
        let zero = AlgoConfig {
            momentum: MomentumMode::Practical(0.0),
            ..cfg
        };
        let crm0 = run(Algorithm::Crm, p.as_ref(), x0, &zero, None).map_err(|e| e.to_string())?;
        ensure(monotone(&cr) && monotone(&crm), || {
            format!("{name}: f column increases")
        })?;
        ensure(same_iterates(&cr, &crm0), || {
            format!("{name}: CRm with β = 0 differs from CR")
        })?;
        runs += 3;
    }
    Ok(format!(
        "{runs} runs on {} problems monotone; β = 0 reproduces CR bitwise",
        problems.len()
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let p = SyntheticProblem::strict_saddle_quartic();
    let t = run(
        Algorithm::Crm,
        &p,
        &DVector::zeros(2),
        &exact_config(1e-6, 30),
        None,
    )
    .map_err(|e| e.to_string())?;
    let x = t.final_point();
    let f = p.value(x).map_err(|e| e.to_string())?;
    let v = stationarity_check(&p, x, 1e-6).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "{} iterations ({}), f = {f:.9}, λ_min = {:.6}, {secs:.3}s",
        t.records.len(),
        t.status,
        v.lambda_min
    );
    ensure(
        t.records.len() <= 30 && f <= -0.24 && v.pass && secs < 1.0,
        || detail.clone(),
    )?;
    Ok(detail)
}

/// Fixed-step gradient descent iterates.
fn gradient_descent(
    p: &dyn Objective,
    x0: &DVector<f64>,
    step: f64,
    iters: usize,
) -> Vec<DVector<f64>> {
    let mut xs = vec![x0.clone()];
    let mut x = x0.clone();
    for _ in 0..iters {
        x -= p.gradient(&x).expect("gradient") * step;
        xs.push(x.clone());
    }
    xs
}

fn criterion_6() -> Outcome {
    let p = SyntheticProblem::convex_logistic(200, 10, 0, 1.0);
    let x0 = DVector::from_element(10, 2.0);
    let reference = run(
        Algorithm::Cr,
        &p,
        &x0,
        &exact_config(f64::MIN_POSITIVE, 60),
        None,
    )
    .map_err(|e| e.to_string())?;
    let x_star = reference.final_point().clone();
    // The reference is accurate to about 1e-17; errors below the floor are noise.
    let floor = 1e-15;
    // From this start the iterates enter the quadratic window early enough to
    // leave four points above the floor.
    let near = DVector::from_element(10, 0.5);
    let t = run(
        Algorithm::Crm,
        &p,
        &near,
        &exact_config(f64::MIN_POSITIVE, 60),
        None,
    )
    .map_err(|e| e.to_string())?;
    let crm = measure_quadratic_rate(&t.iterates, &x_star, floor);
    let l1 = p.lipschitz().l1;
    let gd_pts = gradient_descent(&p, &x0, 1.0 / l1, 2000);
    let gd = measure_quadratic_rate(&gd_pts, &x_star, floor);
    let detail = format!(
        "CRm slope {:.3} over {} points (C_emp {:.3e}), GD slope {:.3} over {} points",
        crm.slope,
        crm.errors.len(),
        crm.c_emp,
        gd.slope,
        gd.errors.len()
    );
    ensure(
        crm.verdict == RateVerdict::Quadratic
            && crm.c_emp.is_finite()
            && crm.c_emp < 1e3
            && gd.errors.len() >= 4
            && (0.8..=1.2).contains(&gd.slope),
        || detail.clone(),
    )?;
    Ok(detail)
}

fn criterion_7() -> Outcome {
    let p = nonconvex_logistic(1000, 20, 0);
    let x0 = DVector::from_element(20, 2.0);
    let cfg = AlgoConfig {
        eps: 1e-5,
        max_iters: 1000,
        ..AlgoConfig::default()
    };
    let cr = run(Algorithm::Cr, &p, &x0, &cfg, None).map_err(|e| e.to_string())?;
    let crm = run(Algorithm::Crm, &p, &x0, &cfg, None).map_err(|e| e.to_string())?;
    let k_cr = cr.iterations_to(1e-5);
    let k_crm = crm.iterations_to(1e-5);
    let rate = crm.momentum_rate(k_crm.unwrap_or(crm.records.len()));
    let detail = format!(
        "CR {k_cr:?} steps, CRm {k_crm:?} steps, momentum accepted {:.0}%",
        100.0 * rate
    );
    ensure(
        matches!((k_cr, k_crm), (Some(a), Some(b)) if b <= a) && rate >= 0.3,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn criterion_8() -> Outcome {
    let p = nonconvex_logistic(300, 10, 2);
    let x0 = DVector::from_element(10, 2.0);
    let cfg = AlgoConfig {
        eps: 1e-6,
        max_iters: 200,
        ..AlgoConfig::default()
    };
    let exact = run(Algorithm::Crm, &p, &x0, &cfg, None).map_err(|e| e.to_string())?;
    let full = InexactConfig::with_fraction(1.0);
    let inexact = run(Algorithm::Crm, &p, &x0, &cfg, Some(&full)).map_err(|e| e.to_string())?;
    ensure(same_iterates(&exact, &inexact), || {
        "full-batch trace differs from exact CRm".into()
    })?;

    let b1 = per_iteration_batch_size(1.0, 0.5, 0.1, 10);
    let b2 = per_iteration_batch_size(1.0, 1.0, 0.1, 10);
    ensure(b1 == 208 && b2 == 56, || format!("batch sizes {b1}, {b2}"))?;

    let q = nonconvex_logistic(100, 5, 8);
    let fs = q.as_finite_sum().expect("finite sum");
    let l1 = q.lipschitz().l1;
    let zeta = 0.1;
    let size = per_iteration_batch_size(l1, l1, zeta, 5).min(100) as usize;
    let w = DVector::from_fn(5, |i, _| 0.5 - 0.2 * i as f64);
    let h_full = q.full_hessian(&w).map_err(|e| e.to_string())?;
    let mut violations = 0;
    for seed in 0..200u64 {
        let batch = crm_core::subsampling::draw_iteration_batch(100, size, seed, 0)
            .map_err(|e| e.to_string())?;
        let hk = SubsampledHessian::new(fs, &w, &batch).map_err(|e| e.to_string())?;
        let diff = crm_core::linalg::densify(&hk) - &h_full;
        let gap = sorted_eigen(&diff).values.amax();
        if gap > l1 {
            violations += 1;
        }
    }
    let frac = violations as f64 / 200.0;
    let detail = format!(
        "full batch bitwise equal over {} iterations; |S1| = 208, 56; concentration |S1| = {size}, violations {:.1}%",
        exact.records.len(),
        100.0 * frac
    );
    ensure(frac <= zeta, || detail.clone())?;
    Ok(detail)
}

fn criterion_9() -> Outcome {
    let mut rng = seeded_rng(9, 0);
    let problems: Vec<(&str, Box<dyn Objective>)> = vec![
        ("quadratic-1d", Box::new(SyntheticProblem::quadratic_1d())),
        (
            "strict-saddle-quartic",
            Box::new(SyntheticProblem::strict_saddle_quartic()),
        ),
        (
            "convex-logistic",
            Box::new(SyntheticProblem::convex_logistic(200, 10, 0, 1.0)),
        ),
        ("logreg", Box::new(nonconvex_logistic(200, 15, 4))),
        (
            "robust",
            Box::new(RobustRegressionProblem::new(Arc::new(
                synthesize_regression(200, 12, 4),
            ))),
        ),
    ];
    let mut worst_fd: f64 = 0.0;
    let mut worst_hv: f64 = 0.0;
    for (name, p) in &problems {
        let d = p.dim();
        assert!(d <= 20);
        for _ in 0..20 {
            let w = gaussian_vec(&mut rng, d);
            let rep = finite_difference_audit(p.as_ref(), &w, None).map_err(|e| e.to_string())?;
            worst_fd = worst_fd
                .max(rep.gradient_error)
                .max(rep.hessian_vector_error);
            ensure(rep.passes(1e-5), || format!("{name}: audit {rep:?}"))?;
            let v = gaussian_vec(&mut rng, d);
            let hv = p.hessian_vector(&w, &v).map_err(|e| e.to_string())?;
            let dense = p.full_hessian(&w).map_err(|e| e.to_string())? * &v;
            let rel = (&hv - &dense).norm() / dense.norm().max(f64::MIN_POSITIVE);
            worst_hv = worst_hv.max(rel);
            ensure(rel <= 1e-10, || {
                format!("{name}: hessian_vector gap {rel:e}")
            })?;
        }
    }
    Ok(format!(
        "worst finite-difference error {worst_fd:.2e}, worst HVP gap {worst_hv:.2e}"
    ))
}

fn cli_run(dir: &std::path::Path) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_crm-bench"))
        .args([
            "--algo",
            "crm",
            "--problem",
            "logreg",
            "--synthetic-size",
            "300x10",
            "--seed",
            "5",
            "--eps",
            "1e-6",
            "--max-iters",
            "100",
            "--out",
        ])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })?;
    std::fs::read_to_string(dir.join("crm.csv")).map_err(|e| e.to_string())
}

fn strip_time(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            if l.starts_with('#') {
                l.to_string()
            } else {
                let mut cols: Vec<&str> = l.split(',').collect();
                if cols.len() > 1 {
                    cols.remove(1);
                }
                cols.join(",")
            }
        })
        .collect()
}

fn criterion_10() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = cli_run(a.path())?;
    let second = cli_run(b.path())?;
    ensure(strip_time(&first) == strip_time(&second), || {
        "CSV files differ beyond wall_time_s".into()
    })?;
    let header = first.lines().next().unwrap_or_default();
    ensure(header == HEADER.join(","), || format!("header {header:?}"))?;
    let parsed = read_trace_csv(first.as_bytes()).map_err(|e| e.to_string())?;
    let gap = gap_series(&parsed.records, None).map_err(|e| e.to_string())?;
    let last = gap.points.last().map(|p| p.1);
    ensure(last == Some(0.0), || format!("final f_gap {last:?}"))?;
    let fgap_file =
        std::fs::read_to_string(a.path().join("crm_fgap.dat")).map_err(|e| e.to_string())?;
    let last_file: f64 = fgap_file
        .lines()
        .rfind(|l| !l.starts_with('#'))
        .and_then(|l| l.split_whitespace().nth(1))
        .and_then(|v| v.parse().ok())
        .ok_or("empty f_gap file")?;
    ensure(last_file == 0.0, || {
        format!("final f_gap in file {last_file}")
    })?;
    grad_series(&parsed.records).map_err(|e| e.to_string())?;
    Ok(format!(
        "{} rows identical modulo wall time, header exact, final f_gap 0",
        parsed.records.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("subproblem oracle equivalence", criterion_1),
        ("hard case", criterion_2),
        ("cubic step bounds", criterion_3),
        ("monotonicity", criterion_4),
        ("saddle escape", criterion_5),
        ("local quadratic rate", criterion_6),
        ("momentum ordering", criterion_7),
        ("inexact equivalence and formulas", criterion_8),
        ("oracle audits", criterion_9),
        ("CLI determinism and format", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
