//! Alice-to-Bob information leakage and forged Bob outcomes.
//!
//! A leakage mode decides which of Alice's setting and outcome reach Bob.
//! A forging strategy then replaces Bob's recorded outcome using only what
//! it was given plus Bob's own setting and local randomness.

use core::fmt;

use rand::Rng;

use crate::error::{check_probability, Error, Result};
use crate::inequality::ProbabilityTable;
use crate::rng::TrialRng;
use crate::sources::{quantum_joint_probs, QuantumState};
use crate::{AngleSet, Setting, SettingPair};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum LeakageMode {
    #[default]
    None,
    OutcomeOnly,
    SettingOnly,
    Both,
}

impl LeakageMode {
    pub fn carries_setting(self) -> bool {
        matches!(self, LeakageMode::SettingOnly | LeakageMode::Both)
    }

    pub fn carries_outcome(self) -> bool {
        matches!(self, LeakageMode::OutcomeOnly | LeakageMode::Both)
    }

    pub fn name(self) -> &'static str {
        match self {
            LeakageMode::None => "none",
            LeakageMode::OutcomeOnly => "outcome-only",
            LeakageMode::SettingOnly => "setting-only",
            LeakageMode::Both => "both",
        }
    }
}

impl fmt::Display for LeakageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What reached Bob for one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeakedInfo {
    mode: LeakageMode,
    setting: Option<Setting>,
    outcome: Option<bool>,
}

impl LeakedInfo {
    pub fn new(mode: LeakageMode, alice_setting: Setting, alice_detect: bool) -> Self {
        Self {
            mode,
            setting: mode.carries_setting().then_some(alice_setting),
            outcome: mode.carries_outcome().then_some(alice_detect),
        }
    }

    pub fn mode(&self) -> LeakageMode {
        self.mode
    }

    fn setting(&self, strategy: &'static str) -> Result<Setting> {
        self.setting.ok_or(Error::ContractViolation {
            strategy,
            datum: "setting",
            mode: self.mode,
        })
    }

    fn outcome(&self, strategy: &'static str) -> Result<bool> {
        self.outcome.ok_or(Error::ContractViolation {
            strategy,
            datum: "outcome",
            mode: self.mode,
        })
    }
}

/// The correlations a forger is trying to reproduce.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForgeTarget {
    /// The quantum joint distribution at the experiment's angles.
    Quantum(QuantumState),
    /// A fixed table over the four setting pairs.
    Table(ProbabilityTable),
}

impl ForgeTarget {
    /// `(P(AB|a,b), P(A|a), P(B|b))` for the target.
    fn pair(&self, pair: SettingPair, angles: &AngleSet) -> (f64, f64, f64) {
        match self {
            ForgeTarget::Quantum(state) => {
                let d = quantum_joint_probs(*state, angles.alice_angle(pair.alice), angles.bob_angle(pair.bob));
                (d.both, d.alice_marginal(), d.bob_marginal())
            }
            ForgeTarget::Table(t) => (t.joint(pair), t.alice(pair.alice), t.bob(pair.bob)),
        }
    }

    /// `P(B = 1 | A = alice_detect, a, b)` under the target.
    fn bob_given_alice(&self, pair: SettingPair, angles: &AngleSet, alice_detect: bool) -> f64 {
        let (j, pa, pb) = self.pair(pair, angles);
        let (num, den) = if alice_detect { (j, pa) } else { (pb - j, 1.0 - pa) };
        ratio(num, den)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// How Bob turns leaked information into a forged outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Forgery {
    /// Draws from the target conditional `P(B|A, a, b)`. Reads setting and outcome.
    ExactConditional,
    /// Draws from `P(B|A, b)`, the target conditional averaged over Alice's
    /// two settings. Reads the outcome only.
    OutcomeConditional,
    /// Bob's target marginal `P(B|a,b)` nudged by `±bias` according to
    /// Alice's setting (`+` for α, `−` for α′). Reads the setting only.
    SettingConditional { bias: f64 },
}

impl Forgery {
    pub fn name(&self) -> &'static str {
        match self {
            Forgery::ExactConditional => "exact-conditional",
            Forgery::OutcomeConditional => "outcome-conditional",
            Forgery::SettingConditional { .. } => "setting-conditional",
        }
    }

    pub fn reads_setting(&self) -> bool {
        matches!(self, Forgery::ExactConditional | Forgery::SettingConditional { .. })
    }

    pub fn reads_outcome(&self) -> bool {
        matches!(self, Forgery::ExactConditional | Forgery::OutcomeConditional)
    }

    /// The strategy that uses exactly what `mode` provides.
    pub fn matching(mode: LeakageMode) -> Option<Self> {
        match mode {
            LeakageMode::None => None,
            LeakageMode::OutcomeOnly => Some(Forgery::OutcomeConditional),
            LeakageMode::SettingOnly => Some(Forgery::SettingConditional { bias: 0.1 }),
            LeakageMode::Both => Some(Forgery::ExactConditional),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForgingStrategy {
    pub forgery: Forgery,
    pub target: ForgeTarget,
}

impl ForgingStrategy {
    pub fn new(forgery: Forgery, target: ForgeTarget) -> Result<Self> {
        if let Forgery::SettingConditional { bias } = forgery {
            check_probability("setting bias", bias)?;
        }
        Ok(Self { forgery, target })
    }

    /// Probability that Bob reports a detection, given what leaked.
    pub fn bob_probability(&self, info: &LeakedInfo, bob: Setting, angles: &AngleSet) -> Result<f64> {
        let name = self.forgery.name();
        Ok(match self.forgery {
            Forgery::ExactConditional => {
                let pair = SettingPair::new(info.setting(name)?, bob);
                self.target.bob_given_alice(pair, angles, info.outcome(name)?)
            }
            Forgery::OutcomeConditional => {
                let detect = info.outcome(name)?;
                let (mut num, mut den) = (0.0, 0.0);
                for a in Setting::BOTH {
                    let (j, pa, pb) = self.target.pair(SettingPair::new(a, bob), angles);
                    if detect {
                        num += j;
                        den += pa;
                    } else {
                        num += pb - j;
                        den += 1.0 - pa;
                    }
                }
                ratio(num, den)
            }
            Forgery::SettingConditional { bias } => {
                let a = info.setting(name)?;
                let (_, _, pb) = self.target.pair(SettingPair::new(a, bob), angles);
                let shift = if a == Setting::Plain { bias } else { -bias };
                (pb + shift).clamp(0.0, 1.0)
            }
        })
    }
}

/// A leakage channel together with the strategy Bob uses on it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Leakage {
    mode: LeakageMode,
    strategy: Option<ForgingStrategy>,
}

impl Leakage {
    pub fn none() -> Self {
        Self::default()
    }

    /// Fails when the strategy reads a datum the mode does not carry, or
    /// when a leaking mode has no strategy.
    pub fn new(mode: LeakageMode, strategy: Option<ForgingStrategy>) -> Result<Self> {
        if let Some(s) = &strategy {
            if s.forgery.reads_setting() && !mode.carries_setting() {
                return Err(Error::ContractViolation {
                    strategy: s.forgery.name(),
                    datum: "setting",
                    mode,
                });
            }
            if s.forgery.reads_outcome() && !mode.carries_outcome() {
                return Err(Error::ContractViolation {
                    strategy: s.forgery.name(),
                    datum: "outcome",
                    mode,
                });
            }
        } else if mode != LeakageMode::None {
            return Err(Error::Invalid(alloc::format!(
                "leakage mode {mode} needs a forging strategy"
            )));
        }
        Ok(Self { mode, strategy })
    }

    pub fn mode(&self) -> LeakageMode {
        self.mode
    }

    pub fn strategy(&self) -> Option<&ForgingStrategy> {
        self.strategy.as_ref()
    }
}

/// Bob's forged detect flag, or `None` when nothing leaks.
///
/// Always draws exactly one uniform from `rng` when forging.
pub fn leak_and_forge(
    alice_setting: Setting,
    alice_detect: bool,
    mode: LeakageMode,
    strategy: &ForgingStrategy,
    bob_setting: Setting,
    angles: &AngleSet,
    rng: &mut TrialRng,
) -> Result<Option<bool>> {
    if mode == LeakageMode::None {
        return Ok(None);
    }
    let info = LeakedInfo::new(mode, alice_setting, alice_detect);
    let p = strategy.bob_probability(&info, bob_setting, angles)?;
    let u: f64 = rng.gen();
    Ok(Some(u < p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, StreamFamily};

    fn quantum(forgery: Forgery) -> ForgingStrategy {
        ForgingStrategy::new(forgery, ForgeTarget::Quantum(QuantumState::maximal())).unwrap()
    }

    #[test]
    fn mode_none_never_overrides() {
        let f = StreamFamily::new(1, Purpose::Leakage);
        let s = quantum(Forgery::ExactConditional);
        for i in 0..100 {
            let out = leak_and_forge(
                Setting::Plain,
                i % 2 == 0,
                LeakageMode::None,
                &s,
                Setting::Prime,
                &AngleSet::ch_optimal(),
                &mut f.stream(i),
            );
            assert_eq!(out, Ok(None));
        }
    }

    #[test]
    fn reading_an_unavailable_datum_is_a_contract_violation() {
        let f = StreamFamily::new(1, Purpose::Leakage);
        let s = quantum(Forgery::OutcomeConditional);
        let err = leak_and_forge(
            Setting::Plain,
            true,
            LeakageMode::SettingOnly,
            &s,
            Setting::Plain,
            &AngleSet::ch_optimal(),
            &mut f.stream(0),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::ContractViolation {
                strategy: "outcome-conditional",
                datum: "outcome",
                mode: LeakageMode::SettingOnly
            }
        );
        assert!(Leakage::new(LeakageMode::SettingOnly, Some(s)).is_err());
        assert!(Leakage::new(LeakageMode::OutcomeOnly, Some(quantum(Forgery::ExactConditional))).is_err());
        assert!(Leakage::new(LeakageMode::Both, Some(s)).is_ok());
        assert!(Leakage::new(LeakageMode::Both, None).is_err());
    }

    #[test]
    fn exact_conditional_reproduces_maximal_joint() {
        // with Alice's detect drawn at rate ½, Bob's forged flag gives P(AB) = ½cos²θ
        let angles = AngleSet::new(0.0, 0.0, 0.3, 0.3);
        let s = quantum(Forgery::ExactConditional);
        let f = StreamFamily::new(2, Purpose::Leakage);
        let g = StreamFamily::new(2, Purpose::Source);
        let n = 100_000u64;
        let mut both = 0u64;
        for i in 0..n {
            let a_detect = g.stream(i).gen::<f64>() < 0.5;
            let b = leak_and_forge(
                Setting::Plain,
                a_detect,
                LeakageMode::Both,
                &s,
                Setting::Plain,
                &angles,
                &mut f.stream(i),
            )
            .unwrap()
            .unwrap();
            both += (a_detect && b) as u64;
        }
        let expected = 0.5 * libm::cos(0.3).powi(2);
        assert!((both as f64 / n as f64 - expected).abs() < 0.01);
    }

    #[test]
    fn setting_bias_shifts_bob_rate() {
        let s = quantum(Forgery::SettingConditional { bias: 0.2 });
        let info = LeakedInfo::new(LeakageMode::SettingOnly, Setting::Plain, true);
        let p = s
            .bob_probability(&info, Setting::Plain, &AngleSet::ch_optimal())
            .unwrap();
        assert!((p - 0.7).abs() < 1e-12);
        let info = LeakedInfo::new(LeakageMode::SettingOnly, Setting::Prime, true);
        let p = s
            .bob_probability(&info, Setting::Plain, &AngleSet::ch_optimal())
            .unwrap();
        assert!((p - 0.3).abs() < 1e-12);
        assert!(ForgingStrategy::new(
            Forgery::SettingConditional { bias: 2.0 },
            ForgeTarget::Quantum(QuantumState::maximal())
        )
        .is_err());
    }

    #[test]
    fn table_target_conditionals() {
        let t = ProbabilityTable::exact([0.4, 0.1, 0.4, 0.4], [0.5, 0.5], [0.5, 0.5]).unwrap();
        let s = ForgingStrategy::new(Forgery::ExactConditional, ForgeTarget::Table(t)).unwrap();
        let info = LeakedInfo::new(LeakageMode::Both, Setting::Plain, true);
        let p = s
            .bob_probability(&info, Setting::Prime, &AngleSet::ch_optimal())
            .unwrap();
        assert!((p - 0.2).abs() < 1e-12);
        let info = LeakedInfo::new(LeakageMode::Both, Setting::Plain, false);
        let p = s
            .bob_probability(&info, Setting::Prime, &AngleSet::ch_optimal())
            .unwrap();
        assert!((p - 0.8).abs() < 1e-12);
    }
}
