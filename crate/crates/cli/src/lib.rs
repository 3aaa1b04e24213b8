//! Experiment driver for the `wowsim` simulator: configuration files,
//! matrix execution with median-of-repetitions selection, and CSV/JSON
//! reports.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{parse_config, validate_config, ConfigError, ExperimentConfig, WorkflowSource};
pub use runner::{cells, derive_seed, median_index, run_cell, run_experiment, Cell, CellOutcome, ExperimentReport};
