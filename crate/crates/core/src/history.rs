//! Bounded time-ordered history of a trajectory with interpolated lookup.

use alloc::collections::VecDeque;

use crate::error::{require, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry<const N: usize> {
    pub t: f64,
    pub state: [f64; N],
    pub derivative: [f64; N],
}

/// Ring of `(t, state, derivative)` samples spanning at least `span` time units.
///
/// Samples must be pushed in strictly increasing time. Once the stored span
/// exceeds the capacity the oldest samples are dropped.
#[derive(Debug, Clone)]
pub struct HistoryBuffer<const N: usize> {
    span: f64,
    entries: VecDeque<HistoryEntry<N>>,
}

impl<const N: usize> HistoryBuffer<N> {
    pub fn new(span: f64) -> Result<Self> {
        require(span > 0.0 && span.is_finite(), "history_span", span, "must be positive")?;
        Ok(Self { span, entries: VecDeque::new() })
    }

    /// Buffer holding the constant function `state` on `[t_end - span, t_end]`
    /// sampled every `dt`, with zero derivative.
    pub fn constant(span: f64, dt: f64, t_end_index: i64, state: [f64; N]) -> Result<Self> {
        require(dt > 0.0, "dt", dt, "must be positive")?;
        let mut buf = Self::new(span)?;
        let n = libm::ceil(span / dt) as i64;
        for i in (t_end_index - n)..=t_end_index {
            buf.push(i as f64 * dt, state, [0.0; N]);
        }
        Ok(buf)
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(oldest, newest)` stored times.
    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((self.entries.front()?.t, self.entries.back()?.t))
    }

    pub fn latest(&self) -> Option<&HistoryEntry<N>> {
        self.entries.back()
    }

    pub fn push(&mut self, t: f64, state: [f64; N], derivative: [f64; N]) {
        if let Some(last) = self.entries.back() {
            assert!(t > last.t, "history times must increase ({t} after {})", last.t);
        }
        self.entries.push_back(HistoryEntry { t, state, derivative });
        // keep one sample at or beyond the span so lookups at exactly `span` back succeed
        while self.entries.len() > 2 && t - self.entries[1].t >= self.span {
            self.entries.pop_front();
        }
    }

    /// Linearly interpolated `(state, derivative)` at `t_query`.
    ///
    /// Exact at stored sample times.
    pub fn lookup(&self, t_query: f64) -> Result<([f64; N], [f64; N])> {
        let out_of_span = || {
            let (start, end) = self.time_range().unwrap_or((f64::NAN, f64::NAN));
            Error::OutOfSpan { query: t_query, start, end }
        };
        let (start, end) = self.time_range().ok_or_else(out_of_span)?;
        if !(t_query >= start && t_query <= end) {
            return Err(out_of_span());
        }
        let last = self.entries.len() - 1;
        let mut i = if last == 0 {
            0
        } else {
            let guess = (t_query - start) / (end - start) * last as f64;
            (guess as usize).min(last)
        };
        while i > 0 && self.entries[i].t > t_query {
            i -= 1;
        }
        while i < last && self.entries[i + 1].t <= t_query {
            i += 1;
        }
        let lo = &self.entries[i];
        if lo.t == t_query || i == last {
            return Ok((lo.state, lo.derivative));
        }
        let hi = &self.entries[i + 1];
        let w = (t_query - lo.t) / (hi.t - lo.t);
        let mut state = [0.0; N];
        let mut derivative = [0.0; N];
        for j in 0..N {
            state[j] = lo.state[j] + w * (hi.state[j] - lo.state[j]);
            derivative[j] = lo.derivative[j] + w * (hi.derivative[j] - lo.derivative[j]);
        }
        Ok((state, derivative))
    }
}

/// Free-function form of [`HistoryBuffer::lookup`].
pub fn history_lookup<const N: usize>(buf: &HistoryBuffer<N>, t_query: f64) -> Result<([f64; N], [f64; N])> {
    buf.lookup(t_query)
}
