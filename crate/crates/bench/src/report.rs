use std::fmt::Write;

use thiserror::Error;

use crate::experiment::ExperimentTrace;

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("need at least two traces, got {0}")]
    TooFew(usize),
    #[error("traces come from different problems: {0} and {1}")]
    MismatchedProblems(String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    /// Iterations until `||∇f|| <= target`, if reached.
    pub iterations_to_target: Option<usize>,
    pub final_f: f64,
    /// Share of iterations (up to the target) that kept the momentum point.
    pub momentum_rate: f64,
    pub hessian_samples: usize,
}

pub fn compare_report(
    traces: &[ExperimentTrace],
    target: f64,
) -> Result<Vec<ReportRow>, ReportError> {
    if traces.len() < 2 {
        return Err(ReportError::TooFew(traces.len()));
    }
    let first = &traces[0].problem;
    if let Some(other) = traces.iter().find(|t| &t.problem != first) {
        return Err(ReportError::MismatchedProblems(
            first.clone(),
            other.problem.clone(),
        ));
    }
    Ok(traces
        .iter()
        .map(|t| {
            let hit = t.trace.iterations_to(target);
            ReportRow {
                label: t.label.clone(),
                iterations_to_target: hit,
                final_f: t.trace.final_value(),
                momentum_rate: t.trace.momentum_rate(hit.unwrap_or(t.trace.records.len())),
                hessian_samples: t.trace.counters.hessian_samples,
            }
        })
        .collect())
}

pub fn render_report(rows: &[ReportRow], target: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8} {:>14} {:>24} {:>10} {:>16}",
        "algo",
        format!("iters<={target:e}"),
        "final_f",
        "momentum",
        "hessian_samples"
    );
    for r in rows {
        let iters = r
            .iterations_to_target
            .map_or_else(|| "-".to_string(), |k| k.to_string());
        let _ = writeln!(
            s,
            "{:<8} {:>14} {:>24.16e} {:>10.3} {:>16}",
            r.label, iters, r.final_f, r.momentum_rate, r.hessian_samples
        );
    }
    s
}
