//! Logical randomized benchmarking for small stabilizer codes.
//!
//! The crate covers Pauli and Clifford algebra, stabilizer codes with lookup
//! recovery, Pauli channels, the induced logical channel, closed-form results
//! for the three-qubit bit-flip code, a Monte Carlo simulator for logical RB
//! experiments, and decay fitting.

pub mod analytic;
pub mod channel;
pub mod clifford;
pub mod code;
pub mod config;
pub mod dense;
pub mod error;
pub mod fit;
pub mod logical;
pub mod pauli;
pub mod ptm;
pub mod rb;
pub mod report;
pub mod rng;

pub use error::{Error, Result};

/// Stamped into every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
