//! Two-column plot data: gradient norm and function-value gap against time.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crm_core::optimizer::IterationRecord;
use thiserror::Error;

/// Replacement for zeros on log-scale axes.
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("trace has no iterations")]
    EmptyTrace,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `(wall_time_s, value)` pairs ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub points: Vec<(f64, f64)>,
    pub clamped: usize,
}

/// Gradient-norm series with zeros raised to [`LOG_FLOOR`].
pub fn grad_series(records: &[IterationRecord]) -> Result<Series, SeriesError> {
    if records.is_empty() {
        return Err(SeriesError::EmptyTrace);
    }
    let mut clamped = 0;
    let points = records
        .iter()
        .map(|r| {
            let g = if r.grad_norm <= 0.0 {
                clamped += 1;
                LOG_FLOOR
            } else {
                r.grad_norm
            };
            (r.wall_time_s, g)
        })
        .collect();
    Ok(Series { points, clamped })
}

/// `f - f_best` where `f_best` is the smaller of the trace minimum and
/// `baseline`.
pub fn gap_series(
    records: &[IterationRecord],
    baseline: Option<f64>,
) -> Result<Series, SeriesError> {
    if records.is_empty() {
        return Err(SeriesError::EmptyTrace);
    }
    let own = records
        .iter()
        .map(|r| r.f_value)
        .fold(f64::INFINITY, f64::min);
    let best = baseline.map_or(own, |b| b.min(own));
    Ok(Series {
        points: records
            .iter()
            .map(|r| (r.wall_time_s, r.f_value - best))
            .collect(),
        clamped: 0,
    })
}

fn write_series(path: &Path, columns: &str, s: &Series) -> Result<(), SeriesError> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# wall_time_s {columns}")?;
    if s.clamped > 0 {
        writeln!(out, "# {} zero values clamped to {LOG_FLOOR:e}", s.clamped)?;
    }
    for (t, v) in &s.points {
        writeln!(out, "{t:.16e} {v:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `<stem>_grad.dat` and `<stem>_fgap.dat` into `dir`.
pub fn emit_series(
    records: &[IterationRecord],
    baseline: Option<f64>,
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf), SeriesError> {
    let grad = grad_series(records)?;
    let gap = gap_series(records, baseline)?;
    let gp = dir.join(format!("{stem}_grad.dat"));
    let fp = dir.join(format!("{stem}_fgap.dat"));
    write_series(&gp, "grad_norm", &grad)?;
    write_series(&fp, "f_gap", &gap)?;
    Ok((gp, fp))
}
