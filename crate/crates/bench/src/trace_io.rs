//! CSV persistence for iteration records.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value exactly. The file ends with `#` comment lines that
//! record the terminal status, counters and warnings.

use std::io::{BufRead, Write};

use crm_core::optimizer::{IterationRecord, TerminalStatus, Trace};
use thiserror::Error;

pub const HEADER: [&str; 10] = [
    "iter",
    "wall_time_s",
    "f_value",
    "grad_norm",
    "step_norm",
    "beta",
    "accepted",
    "lambda_min_est",
    "solver_residual",
    "hessian_samples",
];

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the header, one row per record and the footer.
pub fn write_trace_csv<W: Write>(trace: &Trace, out: W) -> Result<(), TraceIoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in &trace.records {
        w.write_record([
            r.iter.to_string(),
            float(r.wall_time_s),
            float(r.f_value),
            float(r.grad_norm),
            float(r.step_norm),
            float(r.beta),
            r.accepted.to_string(),
            float(r.lambda_min_est),
            float(r.solver_residual),
            r.hessian_samples.to_string(),
        ])?;
    }
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    let c = &trace.counters;
    writeln!(
        out,
        "# status={} iterations={} function_evals={} gradient_evals={} hessian_vector_products={} hessian_samples={}",
        trace.status,
        trace.records.len(),
        c.function_evals,
        c.gradient_evals,
        c.hessian_vector_products,
        c.hessian_samples
    )?;
    for msg in &trace.warnings {
        writeln!(out, "# warning: {}", msg.replace('\n', " "))?;
    }
    out.flush()?;
    Ok(())
}

/// Contents of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub records: Vec<IterationRecord>,
    pub status: Option<TerminalStatus>,
    pub footer: Vec<String>,
}

pub fn read_trace_csv<R: BufRead>(input: R) -> Result<TraceFile, TraceIoError> {
    let mut footer = Vec::new();
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        match line.strip_prefix('#') {
            Some(c) => footer.push(c.trim().to_string()),
            None => {
                body.push_str(&line);
                body.push('\n');
            }
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(TraceIoError::Format {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let bad = |m: String| TraceIoError::Format { line, message: m };
        let f = |j: usize| -> Result<f64, TraceIoError> {
            row[j]
                .parse::<f64>()
                .map_err(|e| bad(format!("{}: {e}", HEADER[j])))
        };
        records.push(IterationRecord {
            iter: row[0].parse().map_err(|e| bad(format!("iter: {e}")))?,
            wall_time_s: f(1)?,
            f_value: f(2)?,
            grad_norm: f(3)?,
            step_norm: f(4)?,
            beta: f(5)?,
            accepted: row[6].parse().map_err(bad)?,
            lambda_min_est: f(7)?,
            solver_residual: f(8)?,
            hessian_samples: row[9]
                .parse()
                .map_err(|e| bad(format!("hessian_samples: {e}")))?,
        });
    }
    let status = footer
        .iter()
        .find_map(|l| l.strip_prefix("status="))
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|s| s.parse().ok());
    Ok(TraceFile {
        records,
        status,
        footer,
    })
}
