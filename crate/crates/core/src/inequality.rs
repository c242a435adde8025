//! The CH inequality family and related residuals, evaluated on supplied
//! probabilities.
//!
//! Everything here is a pure function. Event probabilities follow the
//! single-channel convention: `A` is "Alice's detector fired" and `B` is
//! "Bob's detector fired".

use crate::error::{check_probability, Error, Result};
use crate::{Setting, SettingPair};

/// Slack for the tautology guarantee: four units in the last place of 1.0.
/// All six terms are bounded by one, so this is an absolute bound.
pub const TAUTOLOGY_SLACK: f64 = 4.0 * f64::EPSILON;

/// Left-hand side of the six-term numerical inequality
///
/// `x·y − x·y′ + x′·y + x′·y′ − x′ − y ≤ 0`
///
/// with `x = P(A|α)`, `x′ = P(A|α′)`, `y = P(B|β)`, `y′ = P(B|β′)`. It holds
/// for every input in `[0,1]^4`; the raw value is returned unclamped.
pub fn ch_tautology_lhs(pa_alpha: f64, pa_alpha2: f64, pb_beta: f64, pb_beta2: f64) -> Result<f64> {
    let x = check_probability("P(A|a)", pa_alpha)?;
    let x2 = check_probability("P(A|a')", pa_alpha2)?;
    let y = check_probability("P(B|b)", pb_beta)?;
    let y2 = check_probability("P(B|b')", pb_beta2)?;
    Ok(x * y - x * y2 + x2 * y + x2 * y2 - x2 - y)
}

/// Coefficients of one CH variant: `Σ sign·P(AB|pair) − P(A|alice) − P(B|bob)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChVariant {
    /// Signs of the four joint terms, in [`SettingPair::ALL`] order.
    pub joint_signs: [f64; 4],
    /// Setting whose Alice single-detection probability is subtracted.
    pub alice: Setting,
    /// Setting whose Bob single-detection probability is subtracted.
    pub bob: Setting,
}

impl ChVariant {
    pub fn evaluate(&self, table: &ProbabilityTable) -> f64 {
        let joints: f64 = SettingPair::ALL
            .iter()
            .zip(self.joint_signs)
            .map(|(p, s)| s * table.joint(*p))
            .sum();
        joints - table.alice(self.alice) - table.bob(self.bob)
    }

    /// The pair carrying the negative sign.
    pub fn negative_pair(&self) -> SettingPair {
        let i = self.joint_signs.iter().position(|s| *s < 0.0).unwrap_or(0);
        SettingPair::from_index(i)
    }
}

/// The four CH variants. Variant 0 is the usual form; variants 1-3 move the
/// negative sign to each of the other pairs, with the subtracted singles
/// following it.
pub const CH_VARIANTS: [ChVariant; 4] = [
    ChVariant {
        joint_signs: [1.0, -1.0, 1.0, 1.0],
        alice: Setting::Prime,
        bob: Setting::Plain,
    },
    ChVariant {
        joint_signs: [-1.0, 1.0, 1.0, 1.0],
        alice: Setting::Prime,
        bob: Setting::Prime,
    },
    ChVariant {
        joint_signs: [1.0, 1.0, -1.0, 1.0],
        alice: Setting::Plain,
        bob: Setting::Prime,
    },
    ChVariant {
        joint_signs: [1.0, 1.0, 1.0, -1.0],
        alice: Setting::Plain,
        bob: Setting::Plain,
    },
];

/// Joint and single detection probabilities over the 2×2 setting grid.
///
/// `tolerance` is the amount by which an estimated joint may exceed the
/// smaller of its two marginals; it is zero (up to rounding) for exact tables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityTable {
    joint: [f64; 4],
    alice: [f64; 2],
    bob: [f64; 2],
    tolerance: f64,
}

const ROUNDING: f64 = 1e-12;

impl ProbabilityTable {
    pub fn new(joint: [f64; 4], alice: [f64; 2], bob: [f64; 2], tolerance: f64) -> Result<Self> {
        for j in joint {
            check_probability("P(AB|a,b)", j)?;
        }
        for a in alice {
            check_probability("P(A|a)", a)?;
        }
        for b in bob {
            check_probability("P(B|b)", b)?;
        }
        if tolerance.is_nan() || tolerance < 0.0 {
            return Err(Error::domain("tolerance", tolerance, "[0, inf)"));
        }
        for pair in SettingPair::ALL {
            let bound = alice[pair.alice.index()].min(bob[pair.bob.index()]);
            let j = joint[pair.index()];
            if j > bound + tolerance + ROUNDING {
                return Err(Error::Invalid(alloc::format!(
                    "joint probability {j} for {pair} exceeds its marginals ({bound}) by more than {tolerance}"
                )));
            }
        }
        Ok(Self {
            joint,
            alice,
            bob,
            tolerance,
        })
    }

    pub fn exact(joint: [f64; 4], alice: [f64; 2], bob: [f64; 2]) -> Result<Self> {
        Self::new(joint, alice, bob, 0.0)
    }

    /// The table with `P(AB|a,b) = P(A|a)·P(B|b)` for every pair.
    pub fn factorizable(alice: [f64; 2], bob: [f64; 2]) -> Result<Self> {
        let mut joint = [0.0; 4];
        for p in SettingPair::ALL {
            joint[p.index()] = alice[p.alice.index()] * bob[p.bob.index()];
        }
        Self::exact(joint, alice, bob)
    }

    pub fn joint(&self, pair: SettingPair) -> f64 {
        self.joint[pair.index()]
    }

    pub fn alice(&self, s: Setting) -> f64 {
        self.alice[s.index()]
    }

    pub fn bob(&self, s: Setting) -> f64 {
        self.bob[s.index()]
    }

    pub fn joints(&self) -> [f64; 4] {
        self.joint
    }

    pub fn alice_marginals(&self) -> [f64; 2] {
        self.alice
    }

    pub fn bob_marginals(&self) -> [f64; 2] {
        self.bob
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// Values of the four CH variants and their violation flags.
///
/// A variant is violated iff its value is strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChReport {
    values: [f64; 4],
    violated: [bool; 4],
    any_violated: bool,
}

impl ChReport {
    pub fn from_values(values: [f64; 4]) -> Self {
        let violated = values.map(|v| v > 0.0);
        Self {
            values,
            violated,
            any_violated: violated.iter().any(|v| *v),
        }
    }

    pub fn values(&self) -> [f64; 4] {
        self.values
    }

    pub fn value(&self, variant: usize) -> f64 {
        self.values[variant]
    }

    pub fn violated(&self) -> [bool; 4] {
        self.violated
    }

    pub fn any_violated(&self) -> bool {
        self.any_violated
    }
}

pub fn ch_values(table: &ProbabilityTable) -> ChReport {
    ChReport::from_values(CH_VARIANTS.map(|v| v.evaluate(table)))
}

/// CHSH value over all trials, mapping detect to +1 and no-detect to −1:
/// `E(a,b) = 1 − 2P(A|a) − 2P(B|b) + 4P(AB|a,b)` and
/// `S = E(α,β) − E(α,β′) + E(α′,β) + E(α′,β′)`.
///
/// With this sign pattern `S = 2 + 4·v0`, where `v0` is CH variant 0, so
/// without post-selection CHSH and CH agree on violation.
pub fn chsh_value(table: &ProbabilityTable) -> f64 {
    let signs = CH_VARIANTS[0].joint_signs;
    SettingPair::ALL
        .iter()
        .zip(signs)
        .map(|(p, s)| {
            let e = 1.0 - 2.0 * table.alice(p.alice) - 2.0 * table.bob(p.bob) + 4.0 * table.joint(*p);
            s * e
        })
        .sum()
}

/// Two-channel coincidence counts for one setting pair: only trials where
/// both sides registered a click in some channel. `plus_minus` means Alice
/// `+`, Bob `−`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CoincidenceCounts {
    pub plus_plus: u64,
    pub plus_minus: u64,
    pub minus_plus: u64,
    pub minus_minus: u64,
}

impl CoincidenceCounts {
    pub fn total(&self) -> u64 {
        self.plus_plus + self.plus_minus + self.minus_plus + self.minus_minus
    }

    /// Post-selected correlator, `None` without coincidences.
    pub fn correlator(&self) -> Option<f64> {
        let n = self.total();
        if n == 0 {
            return None;
        }
        let same = (self.plus_plus + self.minus_minus) as f64;
        let diff = (self.plus_minus + self.minus_plus) as f64;
        Some((same - diff) / n as f64)
    }

    pub fn merge(&mut self, other: &Self) {
        self.plus_plus += other.plus_plus;
        self.plus_minus += other.plus_minus;
        self.minus_plus += other.minus_plus;
        self.minus_minus += other.minus_minus;
    }
}

/// CHSH with fair-sampling normalization: correlators are computed only over
/// coincident detections, with the same sign pattern as [`chsh_value`].
///
/// This is the form susceptible to the detection loophole; the counts must be
/// two-channel (±) because single-channel detect flags carry no sign once
/// post-selected on coincidences.
pub fn chsh_fair_sampled(counts: &[CoincidenceCounts; 4]) -> Result<f64> {
    let signs = CH_VARIANTS[0].joint_signs;
    let mut s = 0.0;
    for (i, c) in counts.iter().enumerate() {
        let e = c
            .correlator()
            .ok_or(Error::UndefinedCorrelator(SettingPair::from_index(i)))?;
        s += signs[i] * e;
    }
    Ok(s)
}

/// `max over pairs |P(AB|a,b) − P(A|a)·P(B|b)|`.
pub fn factorizability_residual(table: &ProbabilityTable) -> f64 {
    SettingPair::ALL
        .iter()
        .map(|p| (table.joint(*p) - table.alice(p.alice) * table.bob(p.bob)).abs())
        .fold(0.0, f64::max)
}

/// Statistics of one setting pair with marginals conditioned on both
/// settings: `P(AB|a,b)`, `P(A|a,b)`, `P(B|a,b)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairMarginals {
    pub joint: f64,
    pub alice: f64,
    pub bob: f64,
}

/// Parameter-independence residual:
/// `max(|P(A|a,b) − P(A|a,b′)|, |P(B|a,b) − P(B|a′,b)|)` over settings.
pub fn pi_residual(pairs: &[PairMarginals; 4]) -> f64 {
    let at = |a: Setting, b: Setting| pairs[SettingPair::new(a, b).index()];
    let mut worst: f64 = 0.0;
    for s in Setting::BOTH {
        worst = worst.max((at(s, Setting::Plain).alice - at(s, Setting::Prime).alice).abs());
        worst = worst.max((at(Setting::Plain, s).bob - at(Setting::Prime, s).bob).abs());
    }
    worst
}

/// Outcome-independence residual:
/// `max(|P(A|B,a,b) − P(A|a,b)|, |P(B|A,a,b) − P(B|a,b)|)` over pairs.
///
/// Fails when a conditioning event has probability zero.
pub fn oi_residual(pairs: &[PairMarginals; 4]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, p) in pairs.iter().enumerate() {
        if p.alice <= 0.0 || p.bob <= 0.0 {
            return Err(Error::UndefinedConditional(SettingPair::from_index(i)));
        }
        let a_given_b = p.joint / p.bob;
        let b_given_a = p.joint / p.alice;
        worst = worst.max((a_given_b - p.alice).abs());
        worst = worst.max((b_given_a - p.bob).abs());
    }
    Ok(worst)
}
