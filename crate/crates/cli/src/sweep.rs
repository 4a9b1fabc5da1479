//! One-parameter sweeps over a configuration template.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::config::{ConfigError, RawConfig};
use crate::runner::{run_with, status_text};
use crate::trace::format_number;
use chaosid_core::{ConvergenceReport, RunStatus};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("empty value list")]
    NoValues,
    #[error("sweep key `{0}` cannot be swept")]
    BadKey(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub seed: u64,
    /// Report and status text, or the error that prevented the run.
    pub result: Result<(ConvergenceReport, String), String>,
}

/// Runs one experiment per value, seeded `base + index`, in parallel.
/// Rows come back in input order.
pub fn sweep(template: &RawConfig, key: &str, values: &[String]) -> Result<Vec<SweepRow>, SweepError> {
    if values.is_empty() {
        return Err(SweepError::NoValues);
    }
    if matches!(key, "experiment" | "seed" | "output") {
        return Err(SweepError::BadKey(key.to_string()));
    }
    let base = template.build()?.seed();
    // Reject keys the experiment does not have before starting any run.
    let mut probe = template.clone();
    probe.set(key, &values[0]);
    if let Err(e @ ConfigError::UnknownKey { .. }) = probe.build() {
        return Err(e.into());
    }

    let rows = values
        .par_iter()
        .enumerate()
        .map(|(i, value)| {
            let seed = base.wrapping_add(i as u64);
            let mut raw = template.clone();
            raw.set(key, value);
            raw.set("seed", &seed.to_string());
            let result = raw
                .build()
                .map_err(|e| e.to_string())
                .and_then(|cfg| run_with(&cfg, |_| {}).map_err(|e| e.to_string()))
                .map(|out| (out.report, status_text(&out.status)));
            SweepRow { value: value.clone(), seed, result }
        })
        .collect();
    Ok(rows)
}

pub const SUMMARY_HEADER: [&str; 8] =
    ["value", "seed", "converged", "settle_time", "final_param_error", "final_sync_rms", "clamp_count", "status"];

pub fn write_summary<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        let seed = row.seed.to_string();
        let fields: [String; 6] = match &row.result {
            Ok((r, status)) => [
                r.converged.to_string(),
                r.settle_time.map(format_number).unwrap_or_default(),
                format_number(r.final_param_error),
                format_number(r.final_sync_rms),
                r.clamp_count.to_string(),
                status.clone(),
            ],
            Err(e) => [String::new(), String::new(), String::new(), String::new(), String::new(), format!("error: {e}")],
        };
        w.write_record([row.value.as_str(), seed.as_str()].into_iter().chain(fields.iter().map(String::as_str)))?;
    }
    w.flush()
}

/// True when a row finished its run, whether or not it converged.
pub fn completed(row: &SweepRow) -> bool {
    matches!(&row.result, Ok((_, s)) if s == &status_text(&RunStatus::Completed))
}
