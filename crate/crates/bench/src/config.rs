use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crm_core::cubic::SolverKind;
use crm_core::objectives::SyntheticKind;
use crm_core::optimizer::{Algorithm, MomentumMode};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("algorithm {0} needs a batch specification (--batch-frac, --eps1 or --theta)")]
    MissingBatch(String),
    #[error("synthetic problems take no data path")]
    DataWithSynthetic,
    #[error("invalid value: {0}")]
    Invalid(String),
}

/// One of the six algorithm variants; `_i` variants subsample the Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgoSpec {
    pub base: Algorithm,
    pub inexact: bool,
}

impl fmt::Display for AlgoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, if self.inexact { "_i" } else { "" })
    }
}

impl FromStr for AlgoSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, inexact) = match s.strip_suffix("_i") {
            Some(n) => (n, true),
            None => (s, false),
        };
        let base = name.parse::<Algorithm>().map_err(ConfigError::Parse)?;
        Ok(Self { base, inexact })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemSpec {
    Logreg,
    Robust,
    Synthetic(SyntheticKind),
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Logreg => f.write_str("logreg"),
            ProblemSpec::Robust => f.write_str("robust"),
            ProblemSpec::Synthetic(k) => write!(f, "synthetic:{k}"),
        }
    }
}

impl FromStr for ProblemSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logreg" => Ok(ProblemSpec::Logreg),
            "robust" => Ok(ProblemSpec::Robust),
            _ => match s.strip_prefix("synthetic:") {
                Some(k) => k
                    .parse()
                    .map(ProblemSpec::Synthetic)
                    .map_err(ConfigError::Parse),
                None => Err(ConfigError::Parse(format!(
                    "unknown problem {s:?} (expected logreg, robust or synthetic:<kind>)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartPoint {
    Twos,
    Halves,
    Zeros,
    File(PathBuf),
}

impl FromStr for StartPoint {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "twos" => Ok(StartPoint::Twos),
            "halves" => Ok(StartPoint::Halves),
            "zeros" => Ok(StartPoint::Zeros),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(StartPoint::File(PathBuf::from(p))),
                _ => Err(ConfigError::Parse(format!(
                    "unknown start {s:?} (expected twos, halves, zeros or file:<path>)"
                ))),
            },
        }
    }
}

/// Size of the generated data set used when no file is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthSize {
    pub n: usize,
    pub d: usize,
}

impl Default for SynthSize {
    fn default() -> Self {
        Self { n: 1000, d: 20 }
    }
}

impl FromStr for SynthSize {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ConfigError::Parse(format!("bad size {s:?} (expected <n>x<d>)"));
        let (n, d) = s.split_once('x').ok_or_else(err)?;
        let n: usize = n.parse().map_err(|_| err())?;
        let d: usize = d.parse().map_err(|_| err())?;
        if n == 0 || d == 0 {
            return Err(err());
        }
        Ok(Self { n, d })
    }
}

/// A fully specified benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algo: AlgoSpec,
    pub problem: ProblemSpec,
    pub data_path: Option<PathBuf>,
    pub synthetic_size: SynthSize,
    pub penalty: f64,
    pub rho: f64,
    pub alpha: f64,
    pub momentum: MomentumMode,
    pub batch_fraction: Option<f64>,
    pub eps: f64,
    pub eps1: Option<f64>,
    pub theta: Option<f64>,
    pub zeta: f64,
    pub delta: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub x0: Option<StartPoint>,
}

impl ExperimentConfig {
    pub fn new(algo: AlgoSpec, problem: ProblemSpec) -> Self {
        Self {
            algo,
            problem,
            data_path: None,
            synthetic_size: SynthSize::default(),
            penalty: 10.0,
            rho: 0.9,
            alpha: 0.1,
            momentum: MomentumMode::Theory,
            batch_fraction: None,
            eps: 1e-5,
            eps1: None,
            theta: None,
            zeta: 0.1,
            delta: 0.1,
            max_iters: 1000,
            seed: 0,
            solver: SolverKind::Krylov,
            x0: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.algo.inexact
            && self.batch_fraction.is_none()
            && self.eps1.is_none()
            && self.theta.is_none()
        {
            return Err(ConfigError::MissingBatch(self.algo.to_string()));
        }
        if matches!(self.problem, ProblemSpec::Synthetic(_)) && self.data_path.is_some() {
            return Err(ConfigError::DataWithSynthetic);
        }
        if let Some(f) = self.batch_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(ConfigError::Invalid(format!(
                    "batch fraction {f} not in (0, 1]"
                )));
            }
        }
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "alpha {} must be nonnegative",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Starting point, defaulting to all-twos for logistic regression and
    /// all-halves for robust regression.
    pub fn start(&self) -> StartPoint {
        self.x0.clone().unwrap_or(match self.problem {
            ProblemSpec::Robust => StartPoint::Halves,
            _ => StartPoint::Twos,
        })
    }
}
