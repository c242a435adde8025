//! Counts, probability estimates, partitioned scoring and parameter scans.

mod counts;
mod estimate;
mod partition;
mod record;
mod scan;

use alloc::vec::Vec;

pub use counts::{accumulate_counts, CoincidenceTable, CountsTable, PairCounts};
pub use estimate::{
    ch_standard_errors, estimate_probabilities, pair_marginals, pi_check, table_standard_errors, MarginalMode, PiCheck,
    TableErrors,
};
pub use partition::{
    binomial_band, partition_and_score, partition_and_score_with, partition_bounds, score_records, PartitionReport,
    DEFAULT_MIN_PER_PARTITION, DEFAULT_PARTITIONS,
};
pub use record::{first_non_increasing, TrialRecord};
pub use scan::{
    bierhorst_mixture_test, efficiency_scan, ScanAngles, ScanCell, ScanSpec, ScanTable, PERSISTENT_FRACTION,
};

/// Executes independent jobs `0..n` and returns their results in job order.
///
/// Implementations may run jobs concurrently; callers only rely on the
/// order of the returned vector.
pub trait Runner: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Runner for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
