use alloc::string::String;

use crate::channel::LeakageMode;
use crate::SettingPair;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A numeric argument is outside the domain of the operation.
    #[error("{what} = {value} is outside its domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("insufficient data: no trials recorded for setting pair {0}")]
    MissingPair(SettingPair),

    #[error("insufficient data: {needed} records required, {available} available")]
    TooFewRecords { needed: u64, available: u64 },

    #[error("correlator undefined: zero post-selected coincidences for setting pair {0}")]
    UndefinedCorrelator(SettingPair),

    #[error("conditional probability undefined: conditioning event has zero probability for setting pair {0}")]
    UndefinedConditional(SettingPair),

    #[error("unknown model `{0}`")]
    NotFound(String),

    #[error("forging strategy `{strategy}` reads the alice {datum}, which leakage mode {mode} does not carry")]
    ContractViolation {
        strategy: &'static str,
        datum: &'static str,
        mode: LeakageMode,
    },

    #[error("invalid parameter: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain { what, value, expected }
    }

    /// True for the "not enough data to compute this" family of errors.
    pub fn is_insufficient_data(&self) -> bool {
        matches!(self, Error::MissingPair(_) | Error::TooFewRecords { .. })
    }
}

/// Checks `value ∈ [0, 1]`, rejecting NaN.
pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::domain(what, value, "[0, 1]"))
    }
}
