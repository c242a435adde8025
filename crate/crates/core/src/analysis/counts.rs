use core::ops::{Add, AddAssign};

use super::TrialRecord;
use crate::inequality::CoincidenceCounts;
use crate::sources::Detection;
use crate::SettingPair;

/// Tallies for one setting pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub trials: u64,
    pub coincidences: u64,
    pub alice: u64,
    pub bob: u64,
}

impl PairCounts {
    pub fn add(&mut self, alice_detect: bool, bob_detect: bool) {
        self.trials += 1;
        self.alice += alice_detect as u64;
        self.bob += bob_detect as u64;
        self.coincidences += (alice_detect && bob_detect) as u64;
    }
}

impl AddAssign for PairCounts {
    fn add_assign(&mut self, o: Self) {
        self.trials += o.trials;
        self.coincidences += o.coincidences;
        self.alice += o.alice;
        self.bob += o.bob;
    }
}

/// Per-setting-pair counts. Merging is associative and commutative, so
/// tables built from chunks of a stream can be combined in any order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountsTable {
    pairs: [PairCounts; 4],
}

impl CountsTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: [PairCounts; 4]) -> Self {
        Self { pairs }
    }

    pub fn record(&mut self, r: &TrialRecord) {
        self.pairs[r.pair().index()].add(r.alice_detect, r.bob_detect);
    }

    pub fn pair(&self, p: SettingPair) -> &PairCounts {
        &self.pairs[p.index()]
    }

    pub fn pairs(&self) -> &[PairCounts; 4] {
        &self.pairs
    }

    pub fn total_trials(&self) -> u64 {
        self.pairs.iter().map(|p| p.trials).sum()
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.pairs.iter_mut().zip(other.pairs) {
            *a += b;
        }
    }
}

impl Add for CountsTable {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self.merge(&rhs);
        self
    }
}

impl<'a> FromIterator<&'a TrialRecord> for CountsTable {
    fn from_iter<I: IntoIterator<Item = &'a TrialRecord>>(iter: I) -> Self {
        let mut t = Self::new();
        for r in iter {
            t.record(r);
        }
        t
    }
}

pub fn accumulate_counts<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> CountsTable {
    records.into_iter().collect()
}

/// Two-channel coincidences per setting pair, for fair-sampled CHSH.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CoincidenceTable {
    pub pairs: [CoincidenceCounts; 4],
}

impl CoincidenceTable {
    /// Counts the trial if both sides clicked; ignores it otherwise.
    pub fn record(&mut self, pair: SettingPair, alice: Detection, bob: Detection) {
        let c = &mut self.pairs[pair.index()];
        match (alice, bob) {
            (Detection::Plus, Detection::Plus) => c.plus_plus += 1,
            (Detection::Plus, Detection::Minus) => c.plus_minus += 1,
            (Detection::Minus, Detection::Plus) => c.minus_plus += 1,
            (Detection::Minus, Detection::Minus) => c.minus_minus += 1,
            _ => {}
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.pairs.iter_mut().zip(&other.pairs) {
            a.merge(b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_stream_gives_zero_table() {
        assert_eq!(accumulate_counts(&[]), CountsTable::default());
    }

    #[test]
    fn one_coincident_record_per_pair() {
        let recs: alloc::vec::Vec<_> = SettingPair::ALL
            .iter()
            .enumerate()
            .map(|(i, p)| TrialRecord::new(i as u64, *p, true, true))
            .collect();
        let t = accumulate_counts(&recs);
        for p in SettingPair::ALL {
            assert_eq!(
                *t.pair(p),
                PairCounts {
                    trials: 1,
                    coincidences: 1,
                    alice: 1,
                    bob: 1
                }
            );
        }
    }

    fn arb_records() -> impl Strategy<Value = alloc::vec::Vec<TrialRecord>> {
        proptest::collection::vec((0usize..4, any::<bool>(), any::<bool>()), 0..200).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (p, a, b))| TrialRecord::new(i as u64, SettingPair::from_index(p), a, b))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn chunked_merge_equals_whole(recs in arb_records(), cut in 0usize..200) {
            let cut = cut.min(recs.len());
            let whole = accumulate_counts(&recs);
            let (l, r) = recs.split_at(cut);
            prop_assert_eq!(accumulate_counts(r) + accumulate_counts(l), whole);
        }

        #[test]
        fn count_invariants(recs in arb_records()) {
            let t = accumulate_counts(&recs);
            for p in t.pairs() {
                prop_assert!(p.coincidences <= p.alice.min(p.bob));
                prop_assert!(p.alice.max(p.bob) <= p.trials);
            }
            prop_assert_eq!(t.total_trials(), recs.len() as u64);
        }
    }
}
