//! Benchmark harness: experiment configuration, trace CSV files, plot series
//! and comparison tables.

pub mod config;
pub mod experiment;
pub mod report;
pub mod series;
pub mod trace_io;

pub use config::{AlgoSpec, ConfigError, ExperimentConfig, ProblemSpec, StartPoint, SynthSize};
pub use experiment::{run_experiment, ExperimentError, ExperimentTrace};
pub use report::{compare_report, render_report, ReportError, ReportRow};
pub use series::{emit_series, SeriesError};
pub use trace_io::{read_trace_csv, write_trace_csv, TraceFile, TraceIoError, HEADER};
