use crm_core::cubic::SolverKind;
use crm_core::linalg::{sorted_eigen, FnOperator};
use crm_core::objectives::{Objective, SyntheticProblem};
use crm_core::optimizer::{
    estimate_lambda_min, momentum_coefficient, momentum_point, monotone_select, rate_from_errors,
    run, stationarity_check, Accepted, AlgoConfig, Algorithm, MomentumMode, RateVerdict,
    StationarityVerdict, TerminalStatus,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn exact(eps: f64, max_iters: usize) -> AlgoConfig {
    AlgoConfig {
        solver: SolverKind::Exact,
        eps,
        max_iters,
        ..AlgoConfig::default()
    }
}

#[test]
fn momentum_examples() {
    assert_eq!(
        momentum_coefficient(0.05, 0.2, 0.9, MomentumMode::Theory),
        0.05
    );
    assert!(
        (momentum_coefficient(1.0, 0.2, 0.9, MomentumMode::Practical(8.0)) - 1.6).abs() < 1e-15
    );
    assert_eq!(
        momentum_coefficient(0.0, 0.2, 0.9, MomentumMode::Theory),
        0.0
    );
    let y1 = DVector::from_vec(vec![1.0, 0.0]);
    let v = momentum_point(&y1, &DVector::zeros(2), 0.2);
    assert!((v[0] - 1.2).abs() < 1e-15 && v[1] == 0.0);
    assert_eq!(momentum_point(&y1, &y1, 5.0), y1);
    assert_eq!(monotone_select(3.0, 2.5), Accepted::Momentum);
    assert_eq!(monotone_select(2.5, 2.5), Accepted::Cubic);
    assert_eq!(monotone_select(2.5, f64::NAN), Accepted::Cubic);
}

#[test]
fn cr_on_quadratic_decreases_to_zero() {
    let p = SyntheticProblem::quadratic_1d();
    let t = run(
        Algorithm::Cr,
        &p,
        &DVector::from_element(1, 1.0),
        &exact(1e-10, 100),
        None,
    )
    .unwrap();
    assert!((t.iterates[1][0] - 0.641742).abs() < 1e-6);
    for w in t.iterates.windows(2) {
        assert!(w[1][0] < w[0][0] && w[1][0] >= 0.0);
    }
    assert_eq!(t.status, TerminalStatus::StationaryPass);
}

#[test]
fn first_step_from_saddle_has_hard_case_length() {
    let p = SyntheticProblem::strict_saddle_quartic();
    let t = run(Algorithm::Cr, &p, &DVector::zeros(2), &exact(1e-6, 1), None).unwrap();
    assert!((t.records[0].step_norm - 0.2).abs() < 1e-10);
}

#[test]
fn crm_escapes_saddle() {
    let p = SyntheticProblem::strict_saddle_quartic();
    let t = run(
        Algorithm::Crm,
        &p,
        &DVector::zeros(2),
        &exact(1e-6, 30),
        None,
    )
    .unwrap();
    assert_eq!(t.status, TerminalStatus::StationaryPass);
    let x = t.final_point();
    assert!(p.value(x).unwrap() <= -0.24);
    let lam = sorted_eigen(&p.full_hessian(x).unwrap()).values[0];
    assert!(lam >= -1e-3);
    assert!(stationarity_check(&p, x, 1e-6).unwrap().pass);
}

#[test]
fn reported_success_passes_stationarity() {
    let p = SyntheticProblem::convex_logistic(100, 6, 2, 0.5);
    for algo in [Algorithm::Cr, Algorithm::Crm, Algorithm::Cra] {
        let t = run(
            algo,
            &p,
            &DVector::from_element(6, 2.0),
            &AlgoConfig::default(),
            None,
        )
        .unwrap();
        if t.status == TerminalStatus::StationaryPass {
            assert!(
                stationarity_check(&p, t.final_point(), 1e-5).unwrap().pass,
                "{algo}"
            );
        }
    }
}

#[test]
fn stationarity_boundaries() {
    assert!(StationarityVerdict::new(0.0, -0.01, 1e-4).pass);
    assert!(!StationarityVerdict::new(0.0, -0.01, 9e-5).pass);
    let p = SyntheticProblem::strict_saddle_quartic();
    assert!(
        !stationarity_check(&p, &DVector::zeros(2), 0.5)
            .unwrap()
            .pass
    );
}

#[test]
fn lambda_min_examples() {
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 2.0]));
    assert_eq!(estimate_lambda_min(&d, 1e-10, 0).value, -1.0);
    let eye = DMatrix::<f64>::identity(5, 5);
    let op = FnOperator::new(5, |v: &DVector<f64>| &eye * v);
    let est = estimate_lambda_min(&op, 1e-10, 0);
    assert!((est.value - 1.0).abs() < 1e-14 && est.iterations == 1);
}

#[test]
fn lanczos_lambda_matches_dense_eigensolver() {
    let mut rng = crm_core::dataset::seeded_rng(10, 0);
    use rand::Rng;
    let a = DMatrix::<f64>::from_fn(10, 10, |_, _| rng.random_range(-1.0..1.0));
    let h = (&a + a.transpose()) * 0.5;
    let op = FnOperator::new(10, |v: &DVector<f64>| &h * v);
    let est = estimate_lambda_min(&op, 1e-12, 3);
    let truth = sorted_eigen(&h).values[0];
    assert!(
        (est.value - truth).abs() <= 1e-8,
        "{} vs {truth}",
        est.value
    );
}

#[test]
fn rate_examples() {
    let q = rate_from_errors(&[0.1, 0.01, 1e-4, 1e-8]);
    assert_eq!(q.verdict, RateVerdict::Quadratic);
    let l = rate_from_errors(&[0.1, 0.05, 0.025]);
    assert_eq!(l.verdict, RateVerdict::NonQuadratic);
}

#[test]
fn invalid_config_is_rejected() {
    let p = SyntheticProblem::quadratic_1d();
    let cfg = AlgoConfig {
        penalty: -1.0,
        ..AlgoConfig::default()
    };
    assert!(run(
        Algorithm::Cr,
        &p,
        &DVector::from_element(1, 1.0),
        &cfg,
        None
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theory_beta_is_min_of_three(g in 0.0..5.0f64, s in 0.0..5.0f64, rho in 0.01..0.99f64) {
        let b = momentum_coefficient(g, s, rho, MomentumMode::Theory);
        prop_assert!(b >= 0.0 && b == rho.min(g).min(s));
    }

    #[test]
    fn crm_betas_respect_theory_bound(x in -1.4..1.4f64, y in -2.0..2.0f64) {
        let p = SyntheticProblem::strict_saddle_quartic();
        let t = run(Algorithm::Crm, &p, &DVector::from_vec(vec![x, y]), &exact(1e-8, 40), None).unwrap();
        let mut prev = t.initial_value;
        for (k, r) in t.records.iter().enumerate() {
            let gy = p.gradient(&t.cubic_points[k]).unwrap().norm();
            prop_assert!(r.beta >= 0.0 && r.beta <= 0.9f64.min(gy).min(r.step_norm) + 1e-15);
            prop_assert!(r.f_value <= prev + 1e-12 * (1.0 + prev.abs()));
            prev = r.f_value;
        }
    }
}
