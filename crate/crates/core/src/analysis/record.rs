use crate::{Setting, SettingPair};

/// One recorded trial: both settings and both single-channel detect flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrialRecord {
    pub index: u64,
    pub alice_setting: Setting,
    pub bob_setting: Setting,
    pub alice_detect: bool,
    pub bob_detect: bool,
}

impl TrialRecord {
    pub fn new(index: u64, pair: SettingPair, alice_detect: bool, bob_detect: bool) -> Self {
        Self {
            index,
            alice_setting: pair.alice,
            bob_setting: pair.bob,
            alice_detect,
            bob_detect,
        }
    }

    pub fn pair(&self) -> SettingPair {
        SettingPair::new(self.alice_setting, self.bob_setting)
    }

    pub fn coincident(&self) -> bool {
        self.alice_detect && self.bob_detect
    }
}

/// Index of the first record whose index does not exceed its predecessor's.
pub fn first_non_increasing(records: &[TrialRecord]) -> Option<usize> {
    records.windows(2).position(|w| w[1].index <= w[0].index).map(|i| i + 1)
}
