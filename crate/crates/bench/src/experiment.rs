use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crm_core::dataset::{
    load_libsvm, synthesize_classification, synthesize_regression, DatasetError, LabelKind,
    ParseOptions,
};
use crm_core::objectives::{LogisticRegressionProblem, Objective, RobustRegressionProblem};
use crm_core::optimizer::{run, AlgoConfig, OptimizerError, Trace};
use crm_core::subsampling::{AccuracyMode, BatchPolicy, InexactConfig};
use nalgebra::DVector;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, ProblemSpec, StartPoint};
use crate::series::{emit_series, SeriesError};
use crate::trace_io::{write_trace_csv, TraceIoError};

pub const DATA_DIR_ENV: &str = "CRM_DATA_DIR";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("dataset {path}: {source}")]
    Dataset { path: PathBuf, source: DatasetError },
    #[error("starting point: {0}")]
    StartPoint(String),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    TraceIo(#[from] TraceIoError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A finished run labelled by algorithm and problem.
#[derive(Debug, Clone)]
pub struct ExperimentTrace {
    pub label: String,
    pub problem: String,
    pub trace: Trace,
}

/// Relative paths that do not exist are looked up under `data_dir`.
pub fn resolve_data_path(path: &Path, data_dir: Option<&Path>) -> PathBuf {
    match data_dir {
        Some(dir) if path.is_relative() && !path.exists() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Builds the objective and a description of where its data came from.
pub fn build_problem(
    cfg: &ExperimentConfig,
) -> Result<(Box<dyn Objective>, String), ExperimentError> {
    let env_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
    let load = |kind: LabelKind| -> Result<Option<(Arc<_>, String)>, ExperimentError> {
        let Some(p) = &cfg.data_path else {
            return Ok(None);
        };
        let path = resolve_data_path(p, env_dir.as_deref());
        let opts = ParseOptions {
            dim: None,
            label_kind: kind,
        };
        let ds = load_libsvm(&path, opts).map_err(|source| ExperimentError::Dataset {
            path: path.clone(),
            source,
        })?;
        Ok(Some((Arc::new(ds), path.display().to_string())))
    };
    let size = cfg.synthetic_size;
    let synth_label = format!("synthetic {}x{} seed {}", size.n, size.d, cfg.seed);
    Ok(match cfg.problem {
        ProblemSpec::Logreg => {
            let (data, src) = match load(LabelKind::Binary01)? {
                Some(x) => x,
                None => (
                    Arc::new(synthesize_classification(size.n, size.d, cfg.seed)),
                    synth_label,
                ),
            };
            (
                Box::new(LogisticRegressionProblem::new(data, cfg.alpha)),
                format!("logreg[{src}, alpha {}]", cfg.alpha),
            )
        }
        ProblemSpec::Robust => {
            let (data, src) = match load(LabelKind::Real)? {
                Some(x) => x,
                None => (
                    Arc::new(synthesize_regression(size.n, size.d, cfg.seed)),
                    synth_label,
                ),
            };
            (
                Box::new(RobustRegressionProblem::new(data)),
                format!("robust[{src}]"),
            )
        }
        ProblemSpec::Synthetic(kind) => (kind.build(cfg.seed), format!("synthetic:{kind}")),
    })
}

pub fn start_point(start: &StartPoint, d: usize) -> Result<DVector<f64>, ExperimentError> {
    match start {
        StartPoint::Twos => Ok(DVector::from_element(d, 2.0)),
        StartPoint::Halves => Ok(DVector::from_element(d, 0.5)),
        StartPoint::Zeros => Ok(DVector::zeros(d)),
        StartPoint::File(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| ExperimentError::StartPoint(format!("{}: {e}", p.display())))?;
            let vals: Vec<f64> = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| ExperimentError::StartPoint(format!("{t:?}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            if vals.len() != d {
                return Err(ExperimentError::StartPoint(format!(
                    "{} has {} values, problem dimension is {d}",
                    p.display(),
                    vals.len()
                )));
            }
            Ok(DVector::from_vec(vals))
        }
    }
}

pub fn algo_config(cfg: &ExperimentConfig) -> AlgoConfig {
    AlgoConfig {
        penalty: cfg.penalty,
        rho: cfg.rho,
        momentum: cfg.momentum,
        solver: cfg.solver,
        eps: cfg.eps,
        max_iters: cfg.max_iters,
        seed: cfg.seed,
        ..AlgoConfig::default()
    }
}

/// Subsampling settings for `_i` variants. A batch fraction bypasses the
/// sample-size formula and the step-norm stop; otherwise `--eps1` fixes the
/// accuracy and `--theta` couples it to `sqrt(eps)`.
pub fn inexact_config(cfg: &ExperimentConfig) -> Option<InexactConfig> {
    if !cfg.algo.inexact {
        return None;
    }
    let base = InexactConfig {
        zeta: cfg.zeta,
        delta: cfg.delta,
        ..InexactConfig::default()
    };
    Some(match (cfg.batch_fraction, cfg.eps1) {
        (Some(f), _) => InexactConfig {
            batch: BatchPolicy::Fraction(f),
            step_norm_stop: false,
            ..base
        },
        (None, Some(e1)) => InexactConfig {
            eps1: e1,
            mode: AccuracyMode::FixedEps1,
            ..base
        },
        (None, None) => InexactConfig {
            theta: cfg.theta.unwrap_or(1.0),
            mode: AccuracyMode::Coupled,
            ..base
        },
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTrace, ExperimentError> {
    cfg.validate()?;
    let (problem, problem_label) = build_problem(cfg)?;
    let x0 = start_point(&cfg.start(), problem.dim())?;
    let inexact = inexact_config(cfg);
    let trace = run(
        cfg.algo.base,
        problem.as_ref(),
        &x0,
        &algo_config(cfg),
        inexact.as_ref(),
    )?;
    Ok(ExperimentTrace {
        label: cfg.algo.to_string(),
        problem: problem_label,
        trace,
    })
}

/// Writes `<label>.csv` and the two series files into `dir`.
pub fn persist(
    result: &ExperimentTrace,
    dir: &Path,
    baseline: Option<f64>,
) -> Result<PathBuf, ExperimentError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", result.label));
    let file = std::io::BufWriter::new(fs::File::create(&path)?);
    write_trace_csv(&result.trace, file)?;
    if !result.trace.records.is_empty() {
        emit_series(&result.trace.records, baseline, dir, &result.label)?;
    }
    Ok(path)
}
