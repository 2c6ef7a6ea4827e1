//! File formats and the Monte Carlo harness behind the `pbdlearn` binary.

pub mod bench;
pub mod formats;
