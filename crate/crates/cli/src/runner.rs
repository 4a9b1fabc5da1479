//! Dispatch from a configuration to the matching identifier.

use std::fmt::Write as _;
use std::io::{self, Write};

use chaosid_core::chua::run_chua_experiment;
use chaosid_core::delay::run_delay_experiment;
use chaosid_core::discrete::run_discrete_experiment;
use chaosid_core::{ConvergenceReport, RunOutcome, RunStatus, TraceRecord};

use crate::config::{Experiment, ExperimentConfig};
use crate::trace::{format_number, TraceWriter};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Setup(#[from] chaosid_core::Error),
    #[error("writing trace: {0}")]
    Io(#[from] io::Error),
}

/// Runs the experiment, passing every emitted record to `sink`.
pub fn run_with<F: FnMut(&TraceRecord)>(cfg: &ExperimentConfig, sink: F) -> chaosid_core::Result<RunOutcome> {
    match &cfg.experiment {
        Experiment::TentMap(c) => run_discrete_experiment(c, sink),
        Experiment::Chua(c) => run_chua_experiment(c, sink),
        Experiment::MackeyGlass(c) => run_delay_experiment(c, sink),
    }
}

/// Runs the experiment and writes its CSV trace to `out`.
pub fn run_to_writer<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<(RunOutcome, W), RunError> {
    let mut writer = TraceWriter::new(out, cfg.name(), cfg.seed(), cfg.is_discrete())?;
    let mut io_error = None;
    let outcome = run_with(cfg, |r| {
        if io_error.is_none() {
            io_error = writer.row(r).err();
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let out = writer.finish(&outcome.status)?;
    Ok((outcome, out))
}

fn optional(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), format_number)
}

/// The report as `key=value` lines.
pub fn report_lines(cfg: &ExperimentConfig, outcome: &RunOutcome) -> String {
    let ConvergenceReport { converged, settle_time, final_param_error, final_sync_rms, clamp_count } = outcome.report;
    let mut s = String::new();
    let _ = writeln!(s, "experiment={}", cfg.name());
    let _ = writeln!(s, "seed={}", cfg.seed());
    let _ = writeln!(s, "converged={converged}");
    let _ = writeln!(s, "settle_time={}", optional(settle_time));
    let _ = writeln!(s, "final_param_error={}", format_number(final_param_error));
    let _ = writeln!(s, "final_sync_rms={}", format_number(final_sync_rms));
    let _ = writeln!(s, "clamp_count={clamp_count}");
    let _ = writeln!(s, "status={}", status_text(&outcome.status));
    s
}

pub fn status_text(status: &RunStatus) -> String {
    match status {
        RunStatus::Completed => "completed".into(),
        RunStatus::Aborted(e) => format!("aborted: {e}"),
    }
}

/// Process exit status: 0 converged, 2 completed without converging, 1 error.
pub fn exit_code(outcome: &RunOutcome) -> i32 {
    match (&outcome.status, outcome.report.converged) {
        (RunStatus::Aborted(_), _) => 1,
        (RunStatus::Completed, true) => 0,
        (RunStatus::Completed, false) => 2,
    }
}
