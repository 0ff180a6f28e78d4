//! Experiment orchestration: optimization runs, baselines, enumeration and
//! reporting.

pub mod config;
pub mod history;
pub mod rank;
pub mod report;
pub mod runner;

pub use config::RunConfig;
pub use history::{aggregate_trials, read_log, update_record, AggregatePoint, LogRecord, RunHistory, RunKind, StepMeta};
pub use rank::{enumerate_and_rank, HistogramBin, RankRow, RankTable};
pub use runner::{run_bocs, run_bocs_with, run_random, run_random_with, run_trials, trial_log_path};
