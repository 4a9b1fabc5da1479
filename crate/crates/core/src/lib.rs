//! Identification of discontinuity points and time delays of chaotic systems
//! by adaptive synchronization.
//!
//! A model replica is coupled to an observed "true" system. The model's
//! unknown parameter is adapted by gradient descent on the squared
//! observation error, using an auxiliary sensitivity equation to evaluate the
//! gradient. Three identifiers are provided:
//!
//! - [`discrete`]: a piecewise one-dimensional map (tent map built in),
//!   estimating its switching threshold.
//! - [`chua`]: the Chua circuit, estimating the symmetric breakpoint of its
//!   piecewise-linear characteristic.
//! - [`delay`]: a delay differential equation (Mackey-Glass built in),
//!   estimating its delay, optionally while the true delay drifts.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command
//! line live in the companion `chaosid` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chua;
pub mod delay;
pub mod discrete;
mod error;
pub mod history;
pub mod kernels;
pub mod report;
pub mod rk4;

pub use error::{Error, Result};
pub use report::{ConvergenceReport, ConvergenceTracker, RunOutcome, RunStatus, TraceRecord};
