use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates its invariant.
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    /// A state quantity left its admissible range or became non-finite.
    Diverged { step: u64, quantity: &'static str, value: f64 },
    /// A history lookup fell outside the stored time span.
    OutOfSpan { query: f64, start: f64, end: f64 },
    /// Burn-in could not find a bounded trajectory.
    BurnInFailed { attempts: u32 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value, reason } => {
                write!(f, "invalid parameter {name} = {value}: {reason}")
            }
            Error::Diverged { step, quantity, value } => {
                write!(f, "divergence at step {step}: {quantity} = {value}")
            }
            Error::OutOfSpan { query, start, end } => {
                write!(f, "history lookup at t = {query} outside stored span [{start}, {end}]")
            }
            Error::BurnInFailed { attempts } => {
                write!(f, "burn-in diverged on all {attempts} attempts")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn require(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
