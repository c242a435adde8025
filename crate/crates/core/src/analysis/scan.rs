use alloc::vec::Vec;

use super::{
    accumulate_counts, ch_standard_errors, estimate_probabilities, partition_and_score, MarginalMode, PartitionReport,
    Runner, Sequential,
};
use crate::channel::{DetectorConfig, Leakage};
use crate::error::{Error, Result};
use crate::experiment::Experiment;
use crate::inequality::{ch_values, CH_VARIANTS};
use crate::optimize::ch_optimal_angles;
use crate::rng::derive_seed;
use crate::sources::{quantum_table, QuantumState, SourceModel, TemporalMixture};
use crate::AngleSet;

/// A variant whose partition fraction reaches this is called persistent.
pub const PERSISTENT_FRACTION: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScanAngles {
    Fixed(AngleSet),
    /// Angles maximizing the exact variant-0 value, searched per cell.
    Optimized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub states: Vec<QuantumState>,
    /// Symmetric detector efficiencies.
    pub etas: Vec<f64>,
    pub angles: ScanAngles,
    pub trials_per_cell: u64,
    /// Partitions per cell for the violation fractions.
    pub partitions: usize,
    pub min_per_partition: u64,
    pub mode: MarginalMode,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanCell {
    pub r: f64,
    pub eta: f64,
    pub angles: AngleSet,
    /// Exact variant values from the closed-form table.
    pub expected: [f64; 4],
    /// Monte Carlo estimates over the whole cell.
    pub values: [f64; 4],
    pub std_errors: [f64; 4],
    pub fractions: [f64; 4],
}

impl ScanCell {
    pub fn persistent(&self) -> bool {
        self.fractions.iter().any(|f| *f >= PERSISTENT_FRACTION)
    }
}

/// Cells in row-major order: states outer, efficiencies inner.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable {
    pub n_states: usize,
    pub n_etas: usize,
    pub cells: Vec<ScanCell>,
}

impl ScanTable {
    pub fn cell(&self, state: usize, eta: usize) -> &ScanCell {
        &self.cells[state * self.n_etas + eta]
    }
}

/// Runs the quantum source through symmetric detectors at every
/// `(state, η)` grid point. Each cell uses its own seed derived from the
/// scan seed and the cell position, so cells can run in any order.
pub fn efficiency_scan<R: Runner>(spec: &ScanSpec, runner: &R) -> Result<ScanTable> {
    if spec.states.is_empty() || spec.etas.is_empty() {
        return Err(Error::Invalid("scan grids must be nonempty".into()));
    }
    for &eta in &spec.etas {
        DetectorConfig::symmetric(eta)?;
    }
    let n_etas = spec.etas.len();
    let cells = runner.map(spec.states.len() * n_etas, |i| {
        let state = spec.states[i / n_etas];
        let eta = spec.etas[i % n_etas];
        scan_cell(spec, state, eta, derive_seed(spec.seed, i as u64))
    });
    Ok(ScanTable {
        n_states: spec.states.len(),
        n_etas,
        cells: cells.into_iter().collect::<Result<_>>()?,
    })
}

fn scan_cell(spec: &ScanSpec, state: QuantumState, eta: f64, seed: u64) -> Result<ScanCell> {
    let angles = match spec.angles {
        ScanAngles::Fixed(a) => a,
        ScanAngles::Optimized => ch_optimal_angles(state, eta).angles,
    };
    let mut e = Experiment::new(SourceModel::Quantum(state));
    e.detector = DetectorConfig::symmetric(eta)?;
    e.angles = angles;
    e.seed = seed;
    let run = e.run(spec.trials_per_cell, &Sequential)?;
    let counts = accumulate_counts(&run.records);
    let values = ch_values(&estimate_probabilities(&counts, spec.mode)?).values();
    let std_errors = ch_standard_errors(&counts, spec.mode)?;
    let parts = partition_and_score(&run.records, spec.partitions, spec.min_per_partition, spec.mode)?;
    let exact = quantum_table(state, &angles, eta, eta);
    Ok(ScanCell {
        r: state.r(),
        eta,
        angles,
        expected: CH_VARIANTS.map(|v| v.evaluate(&exact)),
        values,
        std_errors,
        fractions: parts.fractions,
    })
}

/// Feeds a temporal mixture through the standard pipeline (ideal detectors,
/// optional leakage) and applies the 50% rule to the bare CH variants.
pub fn bierhorst_mixture_test<R: Runner>(
    mixture: &TemporalMixture,
    leakage: Leakage,
    k: usize,
    trials: u64,
    seed: u64,
    runner: &R,
) -> Result<PartitionReport> {
    let mut e = Experiment::new(SourceModel::Mixture(mixture.clone()));
    e.leakage = leakage;
    e.seed = seed;
    let run = e.run(trials, runner)?;
    partition_and_score(&run.records, k, super::DEFAULT_MIN_PER_PARTITION, MarginalMode::Pooled)
}
