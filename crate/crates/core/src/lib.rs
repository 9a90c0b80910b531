//! Cubic-regularized Newton methods with momentum and subsampled Hessians.
//!
//! The crate is organised bottom-up: [`linalg`] holds operator and Lanczos
//! utilities, [`dataset`] loads and samples data, [`objectives`] defines the
//! test problems, [`cubic`] solves the cubic subproblem, [`optimizer`] runs the
//! outer loops and [`subsampling`] provides inexact Hessian oracles.

pub mod cubic;
pub mod dataset;
pub mod linalg;
pub mod objectives;
pub mod optimizer;
pub mod subsampling;
