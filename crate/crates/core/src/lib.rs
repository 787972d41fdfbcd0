//! Exact-amplitude simulation of the Mirror semiquantum key distribution
//! protocol, its simplified three-operation variant, and two intercept-resend
//! attacks that break the simplified variant without causing errors.
//!
//! - [`fock`]: truncated Fock-space states, mode-basis changes, measurements.
//! - [`protocol`]: Bob's preparation, Alice's operations, sifting, rates.
//! - [`adversary`]: the attack unitaries and their closed-form predictions.
//! - [`engine`]: exact branch enumeration, Monte Carlo, sweeps, detection.
//! - [`cli`]: the `mirror-sqkd` command-line surface.

pub mod adversary;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod fock;
pub mod protocol;
pub mod stats;

pub use error::{Error, Result};
