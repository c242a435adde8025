//! Randomized check of the six-term tautology and of `m + n ≥ m`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::inequality::{ch_tautology_lhs, TAUTOLOGY_SLACK};
use crate::rng::{Purpose, StreamFamily};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FuzzReport {
    pub samples: u64,
    /// Largest tautology left-hand side seen.
    pub max_lhs: f64,
    /// Samples whose left-hand side exceeded the slack.
    pub tautology_violations: u64,
    /// Samples with `m + n < m` for nonnegative `n`.
    pub sum_violations: u64,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.tautology_violations == 0 && self.sum_violations == 0
    }
}

/// Draws `samples` points uniformly from `[0,1]^4` (with the corners and
/// edges mixed in every 16th sample) and `(m, n)` pairs from `[0, 1e6)`.
pub fn tautology_fuzz(samples: u64, seed: u64) -> Result<FuzzReport> {
    if samples == 0 {
        return Err(Error::Invalid("fuzz needs at least one sample".into()));
    }
    let mut rng = StreamFamily::new(seed, Purpose::Fuzz).stream(0);
    let mut report = FuzzReport {
        samples,
        max_lhs: f64::NEG_INFINITY,
        tautology_violations: 0,
        sum_violations: 0,
    };
    for i in 0..samples {
        let mut x: [f64; 4] = rng.gen();
        if i % 16 == 0 {
            // snap some coordinates to the boundary, where the bound is tight
            let mask: u8 = rng.gen();
            for (j, v) in x.iter_mut().enumerate() {
                if mask >> j & 1 == 1 {
                    *v = if mask >> (j + 4) & 1 == 1 { 1.0 } else { 0.0 };
                }
            }
        }
        let lhs = ch_tautology_lhs(x[0], x[1], x[2], x[3])?;
        report.max_lhs = report.max_lhs.max(lhs);
        report.tautology_violations += (lhs > TAUTOLOGY_SLACK) as u64;

        let m = rng.gen::<f64>() * 1e6;
        let n = rng.gen::<f64>() * 1e6;
        report.sum_violations += (m + n < m) as u64;
    }
    Ok(report)
}
