//! Sweeps, tables and file output for `isoest-core`, plus a multithreaded
//! driver for the Monte-Carlo oracle.
//!
//! The `isoest` binary is a thin layer over this crate: every table it
//! prints is produced by a function in [`tables`], and every file it writes
//! goes through [`output::write_atomic`].

pub mod fit;
pub mod mc;
pub mod output;
pub mod tables;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;
