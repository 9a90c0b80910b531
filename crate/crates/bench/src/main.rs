use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use crm_bench::config::{AlgoSpec, ExperimentConfig, ProblemSpec, StartPoint, SynthSize};
use crm_bench::experiment::{persist, run_experiment};
use crm_bench::report::{compare_report, render_report};
use crm_core::cubic::SolverKind;
use crm_core::optimizer::MomentumMode;

/// Run cubic-regularized Newton variants and write per-iteration traces.
#[derive(Debug, Parser)]
#[command(name = "crm-bench", version)]
struct Cli {
    /// Comma-separated list of cr, crm, cra, cr_i, crm_i, cra_i.
    #[arg(long, default_value = "cr,crm")]
    algo: String,
    /// logreg, robust or synthetic:<quadratic-1d|strict-saddle-quartic|convex-logistic>.
    #[arg(long, default_value = "logreg")]
    problem: ProblemSpec,
    /// LIBSVM file; relative paths are also looked up under $CRM_DATA_DIR.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Size of the generated data set when --data is absent.
    #[arg(long, default_value = "1000x20")]
    synthetic_size: SynthSize,
    /// Cubic penalty M.
    #[arg(long = "m-param", default_value_t = 10.0)]
    m_param: f64,
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    /// Weight of the nonconvex regularizer in logistic regression.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// theory or practical:<c>.
    #[arg(long, default_value = "theory")]
    momentum: MomentumMode,
    /// Hessian batch as a fraction of n (bypasses the sample-size formula).
    #[arg(long)]
    batch_frac: Option<f64>,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Fixed Hessian accuracy for the sample-size formula.
    #[arg(long)]
    eps1: Option<f64>,
    /// Couples the Hessian accuracy to sqrt(eps).
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    zeta: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// exact, krylov or gd.
    #[arg(long, default_value = "krylov")]
    solver: SolverKind,
    /// twos, halves, zeros or file:<path>.
    #[arg(long)]
    x0: Option<StartPoint>,
    /// Gradient-norm threshold for the comparison table (defaults to --eps).
    #[arg(long)]
    target: Option<f64>,
    /// Output directory for traces and plot series.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let algos: Vec<AlgoSpec> = cli
        .algo
        .split(',')
        .map(|s| s.trim().parse::<AlgoSpec>())
        .collect::<Result<_, _>>()
        .context("parsing --algo")?;

    let configs: Vec<ExperimentConfig> = algos
        .iter()
        .map(|&algo| ExperimentConfig {
            data_path: cli.data.clone(),
            synthetic_size: cli.synthetic_size,
            penalty: cli.m_param,
            rho: cli.rho,
            alpha: cli.alpha,
            momentum: cli.momentum,
            batch_fraction: cli.batch_frac,
            eps: cli.eps,
            eps1: cli.eps1,
            theta: cli.theta,
            zeta: cli.zeta,
            delta: cli.delta,
            max_iters: cli.max_iters,
            seed: cli.seed,
            solver: cli.solver,
            x0: cli.x0.clone(),
            ..ExperimentConfig::new(algo, cli.problem)
        })
        .collect();
    for cfg in &configs {
        cfg.validate()
            .with_context(|| format!("configuration for {}", cfg.algo))?;
    }

    let mut results = Vec::new();
    for cfg in &configs {
        let r = run_experiment(cfg).with_context(|| format!("running {}", cfg.algo))?;
        for w in &r.trace.warnings {
            eprintln!("{}: warning: {w}", r.label);
        }
        results.push(r);
    }
    let baseline = results
        .iter()
        .flat_map(|r| r.trace.records.iter().map(|rec| rec.f_value))
        .fold(f64::INFINITY, f64::min);
    for r in &results {
        let path = persist(r, &cli.out, baseline.is_finite().then_some(baseline))
            .with_context(|| format!("writing {}", r.label))?;
        println!(
            "{}: {} after {} iterations, f = {:.10e} -> {}",
            r.label,
            r.trace.status,
            r.trace.records.len(),
            r.trace.final_value(),
            path.display()
        );
    }
    if results.len() >= 2 {
        let target = cli.target.unwrap_or(cli.eps);
        let rows = compare_report(&results, target)?;
        print!("{}", render_report(&rows, target));
    }
    Ok(())
}
