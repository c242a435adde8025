//! Simulation and analysis engine for two-sided EPRB experiments scored with
//! the Clauser-Horne (CH) inequality family.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! parsing, parallel execution and the command-line front end live in the
//! `chlab` crate.
//!
//! Layout:
//!
//! * [`inequality`]: pure evaluation of the CH variants, the six-term
//!   tautology, CHSH, and the factorizability / PI / OI residuals.
//! * [`sources`]: the quantum joint sampler and local hidden-variable models,
//!   including temporal mixtures.
//! * [`channel`]: setting schedules, detection losses, empty windows,
//!   bit-flip noise and Alice-to-Bob information leakage with forging.
//! * [`analysis`]: counts, probability estimation, partitioned scoring,
//!   efficiency scans.
//! * [`experiment`]: the per-trial pipeline tying the above together.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod channel;
mod error;
pub mod experiment;
pub mod fuzz;
pub mod inequality;
pub mod optimize;
pub mod rng;
mod setting;
pub mod sources;

pub use error::{Error, Result};
pub use setting::{AngleSet, Setting, SettingPair};
