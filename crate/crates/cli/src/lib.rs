//! Configuration, CSV traces, single runs and parameter sweeps for the
//! identifiers in `chaosid-core`.

pub mod config;
pub mod runner;
pub mod sweep;
pub mod trace;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig, RawConfig};
pub use runner::{exit_code, report_lines, run_to_writer, run_with, RunError};
pub use sweep::{sweep, write_summary, SweepError, SweepRow};
