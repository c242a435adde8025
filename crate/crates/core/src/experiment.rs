//! The per-trial pipeline: settings, source, detection, leakage, noise.

use alloc::vec::Vec;
use core::ops::Range;

use crate::analysis::{CoincidenceTable, Runner, TrialRecord};
use crate::channel::{apply_detection, draw_settings, flip_record, leak_and_forge, DetectorConfig, Leakage};
use crate::error::{check_probability, Result};
use crate::rng::Streams;
use crate::sources::{Detection, SourceModel, SourceRngs};
use crate::AngleSet;

/// Trials generated per job when a run is split across a [`Runner`].
pub const CHUNK: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub source: SourceModel,
    pub detector: DetectorConfig,
    pub leakage: Leakage,
    pub angles: AngleSet,
    /// Per-side flip probability applied to recorded flags.
    pub noise_rate: f64,
    /// Keep empty-window trials in the record stream (and so in every
    /// normalization). When false they are dropped before counting.
    pub include_empty_windows: bool,
    pub seed: u64,
}

/// One trial before empty-window filtering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    /// Two-channel outcomes after detection and forging, before noise.
    pub alice: Detection,
    pub bob: Detection,
    pub empty_window: bool,
}

/// Records and side statistics of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Run {
    pub records: Vec<TrialRecord>,
    pub coincidences: CoincidenceTable,
    pub trials: u64,
    pub empty_windows: u64,
}

impl Experiment {
    /// Ideal detectors, no leakage, no noise, CH-optimal angles, seed 0.
    pub fn new(source: SourceModel) -> Self {
        Self {
            source,
            detector: DetectorConfig::ideal(),
            leakage: Leakage::none(),
            angles: AngleSet::ch_optimal(),
            noise_rate: 0.0,
            include_empty_windows: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("noise_rate", self.noise_rate)?;
        Ok(())
    }

    pub fn trial(&self, streams: &Streams, index: u64) -> Result<TrialOutcome> {
        let pair = draw_settings(&mut streams.settings.stream(index));
        let a = self.angles.alice_angle(pair.alice);
        let b = self.angles.bob_angle(pair.bob);
        let mut rngs = SourceRngs {
            shared: streams.source.stream(index),
            alice: streams.alice_local.stream(index),
            bob: streams.bob_local.stream(index),
        };
        let raw = self.source.sample_trial(index, a, b, &mut rngs);
        let det = apply_detection(raw, &self.detector, &mut streams.detection.stream(index));
        let alice = det.alice;
        let mut bob = det.bob;
        if let Some(strategy) = self.leakage.strategy() {
            let forged = leak_and_forge(
                pair.alice,
                alice.is_plus(),
                self.leakage.mode(),
                strategy,
                pair.bob,
                &self.angles,
                &mut streams.leakage.stream(index),
            )?;
            if let Some(f) = forged {
                bob = match (f, bob.clicked()) {
                    (true, _) => Detection::Plus,
                    (false, true) => Detection::Minus,
                    (false, false) => Detection::Missed,
                };
            }
        }
        let mut record = TrialRecord::new(index, pair, alice.is_plus(), bob.is_plus());
        if self.noise_rate > 0.0 {
            flip_record(&mut record, self.noise_rate, &mut streams.noise.stream(index));
        }
        Ok(TrialOutcome {
            record,
            alice,
            bob,
            empty_window: det.empty_window,
        })
    }

    /// Runs trials with indices in `range` in order.
    pub fn run_range(&self, streams: &Streams, range: Range<u64>) -> Result<Run> {
        let mut run = Run::default();
        for i in range {
            let t = self.trial(streams, i)?;
            run.trials += 1;
            run.empty_windows += t.empty_window as u64;
            if t.empty_window && !self.include_empty_windows {
                continue;
            }
            run.coincidences.record(t.record.pair(), t.alice, t.bob);
            run.records.push(t.record);
        }
        Ok(run)
    }

    /// Trials `0..n_trials`, split into chunks of [`CHUNK`] across `runner`.
    /// The result does not depend on the runner.
    pub fn run<R: Runner>(&self, n_trials: u64, runner: &R) -> Result<Run> {
        self.validate()?;
        let streams = Streams::new(self.seed);
        let chunks = n_trials.div_ceil(CHUNK) as usize;
        let parts = runner.map(chunks, |c| {
            let start = c as u64 * CHUNK;
            self.run_range(&streams, start..(start + CHUNK).min(n_trials))
        });
        let mut run = Run {
            records: Vec::with_capacity(n_trials as usize),
            ..Run::default()
        };
        for part in parts {
            let part = part?;
            run.records.extend_from_slice(&part.records);
            run.coincidences.merge(&part.coincidences);
            run.trials += part.trials;
            run.empty_windows += part.empty_windows;
        }
        Ok(run)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{accumulate_counts, first_non_increasing, Sequential};
    use crate::sources::{CosineSign, LocalModel, QuantumState};

    /// Runs jobs in reverse order to stand in for an out-of-order pool.
    struct Reversed;

    impl Runner for Reversed {
        fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
        where
            T: Send,
            F: Fn(usize) -> T + Sync + Send,
        {
            let mut out: Vec<(usize, T)> = (0..n).rev().map(|i| (i, f(i))).collect();
            out.reverse();
            out.into_iter().map(|(_, t)| t).collect()
        }
    }

    #[test]
    fn run_is_independent_of_runner_and_chunking() {
        let mut e = Experiment::new(SourceModel::Quantum(QuantumState::maximal()));
        e.detector = DetectorConfig::new(0.8, 0.7, 0.05).unwrap();
        e.noise_rate = 0.01;
        e.seed = 42;
        let n = 2 * CHUNK + 123;
        let a = e.run(n, &Sequential).unwrap();
        let b = e.run(n, &Reversed).unwrap();
        assert_eq!(a, b);
        let c = e.run_range(&Streams::new(42), 0..n).unwrap();
        assert_eq!(a, c);
        assert_eq!(a.records.len() as u64, n);
        assert_eq!(first_non_increasing(&a.records), None);
    }

    #[test]
    fn excluding_empty_windows_drops_them() {
        let mut e = Experiment::new(SourceModel::Local(LocalModel::CosineSign(CosineSign)));
        e.detector = DetectorConfig::new(1.0, 1.0, 0.5).unwrap();
        let with = e.run(10_000, &Sequential).unwrap();
        e.include_empty_windows = false;
        let without = e.run(10_000, &Sequential).unwrap();
        assert_eq!(with.empty_windows, without.empty_windows);
        assert_eq!(without.records.len() as u64, 10_000 - without.empty_windows);
        // dropping blank trials keeps every detection
        let cw = accumulate_counts(&with.records);
        let cwo = accumulate_counts(&without.records);
        for (x, y) in cw.pairs().iter().zip(cwo.pairs()) {
            assert_eq!((x.alice, x.bob, x.coincidences), (y.alice, y.bob, y.coincidences));
        }
    }

    #[test]
    fn seed_changes_the_stream() {
        let mut e = Experiment::new(SourceModel::Quantum(QuantumState::maximal()));
        let a = e.run(1000, &Sequential).unwrap();
        e.seed = 1;
        let b = e.run(1000, &Sequential).unwrap();
        assert_ne!(a.records, b.records);
    }

    #[test]
    fn invalid_noise_is_rejected() {
        let mut e = Experiment::new(SourceModel::Quantum(QuantumState::maximal()));
        e.noise_rate = 1.5;
        assert!(e.run(10, &Sequential).is_err());
    }
}
