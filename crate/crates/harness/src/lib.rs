//! Configuration-driven experiment harness: training-set generation, offline
//! network training and NMSE sweeps (versus SNR or pilot length) written as
//! CSV.

pub mod commands;
pub mod config;
pub mod error;
pub mod results;

pub use commands::{gen_data, inspect_weights, run, train, GenDataReport, RunReport, TrainReport};
pub use config::{ExperimentConfig, NetKind, SolverKind, SweepAxis};
pub use error::{HarnessError, Result};
pub use results::{median, read_csv, summarize, ResultRow, SummaryRow};
