//! CSV trace output.

use std::io::{self, Write};

use chaosid_core::kernels::RNG_NAME;
use chaosid_core::{RunStatus, TraceRecord};

pub const COLUMNS: [&str; 6] = ["observed_true", "observed_model", "sync_error", "estimate", "true_param", "sensitivity"];

/// Minimum number of significant digits written for nonzero values.
pub const MIN_DIGITS: usize = 12;

/// Plain decimal notation that round-trips, padded with trailing zeros to at
/// least [`MIN_DIGITS`] significant digits.
pub fn format_number(v: f64) -> String {
    // Display for f64 never switches to exponent notation.
    let mut s = format!("{v}");
    if v == 0.0 || !v.is_finite() {
        return s;
    }
    let digits = s.trim_start_matches(['-', '0', '.']).chars().filter(char::is_ascii_digit).count();
    if digits < MIN_DIGITS {
        if !s.contains('.') {
            s.push('.');
        }
        s.extend(std::iter::repeat_n('0', MIN_DIGITS - digits));
    }
    s
}

pub struct TraceWriter<W: Write> {
    out: W,
    discrete: bool,
    rows: u64,
}

impl<W: Write> TraceWriter<W> {
    /// Writes the provenance comment and the header row.
    pub fn new(mut out: W, experiment: &str, seed: u64, discrete: bool) -> io::Result<Self> {
        writeln!(out, "# experiment: {experiment}; rng: {RNG_NAME}; seed: {seed}")?;
        let index = if discrete { "k" } else { "t" };
        writeln!(out, "{index},{}", COLUMNS.join(","))?;
        Ok(Self { out, discrete, rows: 0 })
    }

    pub fn row(&mut self, r: &TraceRecord) -> io::Result<()> {
        if self.discrete {
            write!(self.out, "{}", r.time as u64)?;
        } else {
            write!(self.out, "{}", format_number(r.time))?;
        }
        for v in [r.observed_true, r.observed_model, r.sync_error, r.estimate, r.true_param, r.sensitivity] {
            write!(self.out, ",{}", format_number(v))?;
        }
        self.out.write_all(b"\n")?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    /// Appends a status comment for runs that did not complete and returns
    /// the underlying writer.
    pub fn finish(mut self, status: &RunStatus) -> io::Result<W> {
        if let RunStatus::Aborted(e) = status {
            writeln!(self.out, "# status: aborted: {e}")?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}
