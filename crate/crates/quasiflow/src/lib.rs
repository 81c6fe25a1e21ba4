//! Command-line driver for `quasiflow-core`: run records, profile input,
//! concurrent κ sweeps and the acceptance checks.

pub mod acceptance;
pub mod cli;
pub mod error;
pub mod input;
pub mod record;
pub mod sweep;
