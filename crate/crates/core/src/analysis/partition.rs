use alloc::vec::Vec;
use core::ops::Range;

use libm::sqrt;

use super::{accumulate_counts, estimate_probabilities, MarginalMode, Runner, Sequential, TrialRecord};
use crate::error::{Error, Result};
use crate::inequality::{ch_values, ChReport};

pub const DEFAULT_PARTITIONS: usize = 100;
pub const DEFAULT_MIN_PER_PARTITION: u64 = 1000;

/// CH values of a block of records.
pub fn score_records(records: &[TrialRecord], mode: MarginalMode) -> Result<ChReport> {
    Ok(ch_values(&estimate_probabilities(&accumulate_counts(records), mode)?))
}

/// `k` contiguous ranges covering `0..n`. Sizes differ by at most one; the
/// first `n mod k` blocks get the extra record.
pub fn partition_bounds(n: usize, k: usize) -> Vec<Range<usize>> {
    let (base, extra) = (n / k, n % k);
    let mut start = 0;
    (0..k)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Outcome of the 50% rule over `k` sequential partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionReport {
    pub k: usize,
    pub partitions: Vec<ChReport>,
    /// Violating partitions over `k`, per variant.
    pub fractions: [f64; 4],
    /// Partitions violating at least one variant, over `k`. Its chance
    /// baseline is above one half because four variants are tested.
    pub any_fraction: f64,
}

impl PartitionReport {
    pub fn from_partitions(partitions: Vec<ChReport>) -> Result<Self> {
        let k = partitions.len();
        if k == 0 {
            return Err(Error::Invalid("partition count must be positive".into()));
        }
        let mut hits = [0usize; 4];
        let mut any = 0usize;
        for p in &partitions {
            for (h, v) in hits.iter_mut().zip(p.violated()) {
                *h += v as usize;
            }
            any += p.any_violated() as usize;
        }
        Ok(Self {
            k,
            fractions: hits.map(|h| h as f64 / k as f64),
            any_fraction: any as f64 / k as f64,
            partitions,
        })
    }

    /// Binomial 3σ band around one half for this `k`.
    pub fn band(&self) -> (f64, f64) {
        binomial_band(self.k)
    }
}

/// `0.5 ± 3·√(0.25/k)`: where a per-variant fraction lands for a source at
/// the CH boundary.
pub fn binomial_band(k: usize) -> (f64, f64) {
    let half = 3.0 * sqrt(0.25 / k as f64);
    (0.5 - half, 0.5 + half)
}

/// Splits `records` into `k` equal contiguous blocks and scores each one.
/// No block is ever dropped.
pub fn partition_and_score(
    records: &[TrialRecord],
    k: usize,
    min_per_partition: u64,
    mode: MarginalMode,
) -> Result<PartitionReport> {
    partition_and_score_with(&Sequential, records, k, min_per_partition, mode)
}

pub fn partition_and_score_with<R: Runner>(
    runner: &R,
    records: &[TrialRecord],
    k: usize,
    min_per_partition: u64,
    mode: MarginalMode,
) -> Result<PartitionReport> {
    if k == 0 {
        return Err(Error::Invalid("partition count must be positive".into()));
    }
    let needed = (k as u64).saturating_mul(min_per_partition.max(1));
    if (records.len() as u64) < needed {
        return Err(Error::TooFewRecords {
            needed,
            available: records.len() as u64,
        });
    }
    let bounds = partition_bounds(records.len(), k);
    let scored = runner.map(k, |i| score_records(&records[bounds[i].clone()], mode));
    PartitionReport::from_partitions(scored.into_iter().collect::<Result<Vec<_>>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SettingPair;
    use proptest::prelude::*;

    fn cycling(n: u64) -> Vec<TrialRecord> {
        (0..n)
            .map(|i| TrialRecord::new(i, SettingPair::from_index((i % 4) as usize), i % 3 == 0, i % 5 < 2))
            .collect()
    }

    #[test]
    fn bounds_cover_without_gaps() {
        let b = partition_bounds(10, 3);
        assert_eq!(b, [0..4, 4..7, 7..10]);
        assert_eq!(
            partition_bounds(8, 4).iter().map(|r| r.len()).collect::<Vec<_>>(),
            [2; 4]
        );
    }

    #[test]
    fn too_few_records() {
        let recs = cycling(40);
        let err = partition_and_score(&recs, 41, 1, MarginalMode::Pooled).unwrap_err();
        assert!(err.is_insufficient_data());
        assert!(partition_and_score(&recs, 2, 1000, MarginalMode::Pooled)
            .unwrap_err()
            .is_insufficient_data());
        assert!(partition_and_score(&recs, 0, 1, MarginalMode::Pooled).is_err());
    }

    #[test]
    fn single_partition_equals_full_score() {
        let recs = cycling(4000);
        for mode in [MarginalMode::Pooled, MarginalMode::PerPair] {
            let rep = partition_and_score(&recs, 1, 1000, mode).unwrap();
            assert_eq!(rep.partitions, [score_records(&recs, mode).unwrap()]);
        }
    }

    #[test]
    fn band_for_hundred_partitions() {
        let (lo, hi) = binomial_band(100);
        assert!((lo - 0.35).abs() < 1e-12 && (hi - 0.65).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bounds_partition_everything(n in 0usize..5000, k in 1usize..200) {
            let b = partition_bounds(n, k);
            prop_assert_eq!(b.len(), k);
            prop_assert_eq!(b[0].start, 0);
            prop_assert_eq!(b[k - 1].end, n);
            for w in b.windows(2) {
                prop_assert_eq!(w[0].end, w[1].start);
                prop_assert!(w[0].len() >= w[1].len() && w[0].len() <= w[1].len() + 1);
            }
        }

        #[test]
        fn fractions_count_violating_partitions(vals in proptest::collection::vec(proptest::array::uniform4(-1.0f64..1.0), 1..50)) {
            let reps: Vec<_> = vals.iter().map(|v| ChReport::from_values(*v)).collect();
            let r = PartitionReport::from_partitions(reps).unwrap();
            for i in 0..4 {
                let n = vals.iter().filter(|v| v[i] > 0.0).count();
                prop_assert_eq!(r.fractions[i], n as f64 / vals.len() as f64);
            }
        }
    }
}
