//! Configuration files, trial-record files, report export, parallel
//! execution and the command implementations behind the `chlab` binary.
//! The simulation itself lives in `chlab-core`.

pub mod commands;
pub mod config;
mod error;
pub mod parallel;
pub mod report;
pub mod trials;

pub use error::{Error, Result};
