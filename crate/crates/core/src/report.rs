//! Trace rows and convergence diagnostics shared by all experiments.

use crate::error::Error;

/// One decimated output row of an identification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// Step index (discrete runs) or time.
    pub time: f64,
    /// `h(x)`
    pub observed_true: f64,
    /// `h(y)`
    pub observed_model: f64,
    /// `|h(x) - h(y)|`
    pub sync_error: f64,
    /// Current estimate of the unknown parameter.
    pub estimate: f64,
    /// Current value of the true parameter.
    pub true_param: f64,
    /// Sensitivity of the observed model output to the estimate.
    pub sensitivity: f64,
}

impl TraceRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.time,
            self.observed_true,
            self.observed_model,
            self.sync_error,
            self.estimate,
            self.true_param,
            self.sensitivity,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// First time after which the parameter error stayed below tolerance.
    pub settle_time: Option<f64>,
    pub final_param_error: f64,
    /// RMS of the sync error over the last 10% of the run.
    pub final_sync_rms: f64,
    pub clamp_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The run stopped early; the trace emitted so far is still valid.
    Aborted(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: ConvergenceReport,
    pub status: RunStatus,
}

/// Streaming accumulator for [`ConvergenceReport`], fed at every step.
#[derive(Debug, Clone)]
pub struct ConvergenceTracker {
    tol_param: f64,
    sync_tol: f64,
    window_start: f64,
    settle: Option<f64>,
    last_param_error: f64,
    sq_sum: f64,
    count: u64,
}

impl ConvergenceTracker {
    /// `start` and `end` bound the run; the sync RMS window is its last tenth.
    pub fn new(start: f64, end: f64, tol_param: f64, sync_tol: f64) -> Self {
        Self {
            tol_param,
            sync_tol,
            window_start: start + 0.9 * (end - start),
            settle: None,
            last_param_error: f64::NAN,
            sq_sum: 0.0,
            count: 0,
        }
    }

    pub fn record(&mut self, time: f64, param_error: f64, sync_error: f64) {
        let e = param_error.abs();
        self.last_param_error = e;
        if e <= self.tol_param {
            self.settle.get_or_insert(time);
        } else {
            self.settle = None;
        }
        if time >= self.window_start {
            self.sq_sum += sync_error * sync_error;
            self.count += 1;
        }
    }

    pub fn finish(&self, clamp_count: u64, completed: bool) -> ConvergenceReport {
        let final_sync_rms = if self.count == 0 {
            f64::NAN
        } else {
            libm::sqrt(self.sq_sum / self.count as f64)
        };
        let converged = completed && self.settle.is_some() && final_sync_rms <= self.sync_tol;
        ConvergenceReport {
            converged,
            settle_time: self.settle,
            final_param_error: self.last_param_error,
            final_sync_rms,
            clamp_count,
        }
    }
}

/// Decides which steps emit a trace row.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Decimator {
    stride: u64,
}

impl Decimator {
    pub(crate) fn new(stride: u64) -> Self {
        Self { stride: stride.max(1) }
    }

    #[inline]
    pub(crate) fn emits(&self, step: u64) -> bool {
        step.is_multiple_of(self.stride)
    }
}
