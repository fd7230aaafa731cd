//! The 2D shear-layer benchmark and the single-cell timing benchmark.
//!
//! A tanh mixture-fraction profile with a hot interface is advanced by
//! alternating chemistry (per-cell reactor solves, optionally
//! load-balanced and reference-mapped) with an explicit diffusion step
//! that stands in for transport. Per-worker busy times, solve counts and
//! imbalance ratios are captured each iteration and written out as CSV
//! plus a text summary.

mod benchmark;
mod config;
mod field;
mod report;

pub use benchmark::{
    run_benchmark, run_benchmark_with, single_cell_benchmark, BenchmarkReport, SingleCellRow,
};
pub use config::{load_mechanism, Mode, RunConfig, BUILTIN_MECH};
pub use field::{init_shear_layer, mixing_step, write_field_csv, FieldState};
pub use report::{emit_report, write_single_cell_csv};

use crate::balancer::BalancerError;
use crate::kinetics::KineticsError;
use crate::odesolver::OdeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(transparent)]
    Balancer(#[from] BalancerError),
    #[error("cell {cell_id}: {source}")]
    Solve { cell_id: u64, source: OdeError },
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}
