//! Everything between the source and the recorded counts.

mod leakage;
mod signaling;

use alloc::vec::Vec;

use rand::{Rng, RngCore};

pub use leakage::{leak_and_forge, ForgeTarget, Forgery, ForgingStrategy, Leakage, LeakageMode, LeakedInfo};
pub use signaling::{decode_signal, signaling_pattern_demo, SignalingDemo};

use crate::analysis::TrialRecord;
use crate::error::{check_probability, Error, Result};
use crate::rng::{StreamFamily, TrialRng};
use crate::sources::{Detection, RawPair};
use crate::{Setting, SettingPair};

/// Detector efficiencies and the rate of trial windows with no emission.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig {
    eta_alice: f64,
    eta_bob: f64,
    empty_window_rate: f64,
}

impl DetectorConfig {
    pub fn new(eta_alice: f64, eta_bob: f64, empty_window_rate: f64) -> Result<Self> {
        Ok(Self {
            eta_alice: check_probability("eta_alice", eta_alice)?,
            eta_bob: check_probability("eta_bob", eta_bob)?,
            empty_window_rate: check_probability("empty_window_rate", empty_window_rate)?,
        })
    }

    pub fn ideal() -> Self {
        Self {
            eta_alice: 1.0,
            eta_bob: 1.0,
            empty_window_rate: 0.0,
        }
    }

    pub fn symmetric(eta: f64) -> Result<Self> {
        Self::new(eta, eta, 0.0)
    }

    pub fn eta_alice(&self) -> f64 {
        self.eta_alice
    }

    pub fn eta_bob(&self) -> f64 {
        self.eta_bob
    }

    pub fn empty_window_rate(&self) -> f64 {
        self.empty_window_rate
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Outcomes after detector losses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetectedPair {
    pub alice: Detection,
    pub bob: Detection,
    /// The window held no emission; both sides are `Missed`.
    pub empty_window: bool,
}

/// Applies window emptiness, then independent per-side efficiency.
///
/// Always consumes three uniforms in the same order, so raising an
/// efficiency only ever adds detections for a fixed stream.
pub fn apply_detection(raw: RawPair, det: &DetectorConfig, rng: &mut TrialRng) -> DetectedPair {
    let u_empty: f64 = rng.gen();
    let u_alice: f64 = rng.gen();
    let u_bob: f64 = rng.gen();
    if u_empty < det.empty_window_rate {
        return DetectedPair {
            alice: Detection::Missed,
            bob: Detection::Missed,
            empty_window: true,
        };
    }
    let survive = |d: Detection, u: f64, eta: f64| if u < eta { d } else { Detection::Missed };
    DetectedPair {
        alice: survive(raw.alice, u_alice, det.eta_alice),
        bob: survive(raw.bob, u_bob, det.eta_bob),
        empty_window: false,
    }
}

/// Both settings drawn independently and uniformly from one 64-bit word.
pub fn draw_settings(rng: &mut TrialRng) -> SettingPair {
    let bits = rng.next_u64();
    let pick = |b: u64| if b & 1 == 0 { Setting::Plain } else { Setting::Prime };
    SettingPair::new(pick(bits >> 63), pick(bits >> 62))
}

/// The per-trial setting choices for trials `0..n_trials`.
pub fn schedule_settings(n_trials: u64, family: &StreamFamily) -> Result<Vec<SettingPair>> {
    if n_trials == 0 {
        return Err(Error::Invalid("setting schedule needs at least one trial".into()));
    }
    Ok((0..n_trials).map(|i| draw_settings(&mut family.stream(i))).collect())
}

/// Flips each detect flag of one record independently with probability `rate`.
pub fn flip_record(record: &mut TrialRecord, rate: f64, rng: &mut TrialRng) {
    let u_alice: f64 = rng.gen();
    let u_bob: f64 = rng.gen();
    if u_alice < rate {
        record.alice_detect = !record.alice_detect;
    }
    if u_bob < rate {
        record.bob_detect = !record.bob_detect;
    }
}

/// Readout corruption: each side's flag flips independently with probability
/// `rate`, using the stream keyed by each record's index.
pub fn bit_flip_noise(records: &mut [TrialRecord], rate: f64, family: &StreamFamily) -> Result<()> {
    check_probability("flip rate", rate)?;
    if rate == 0.0 {
        return Ok(());
    }
    for r in records.iter_mut() {
        flip_record(r, rate, &mut family.stream(r.index));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;

    fn family(p: Purpose) -> StreamFamily {
        StreamFamily::new(99, p)
    }

    fn plus_pair() -> RawPair {
        RawPair {
            alice: Detection::Plus,
            bob: Detection::Plus,
        }
    }

    #[test]
    fn ideal_detection_is_identity() {
        let f = family(Purpose::Detection);
        for i in 0..200 {
            for raw in [
                plus_pair(),
                RawPair {
                    alice: Detection::Minus,
                    bob: Detection::Missed,
                },
            ] {
                let d = apply_detection(raw, &DetectorConfig::ideal(), &mut f.stream(i));
                assert_eq!((d.alice, d.bob, d.empty_window), (raw.alice, raw.bob, false));
            }
        }
    }

    #[test]
    fn zero_alice_efficiency_never_detects() {
        let det = DetectorConfig::new(0.0, 1.0, 0.0).unwrap();
        let f = family(Purpose::Detection);
        for i in 0..1000 {
            let d = apply_detection(plus_pair(), &det, &mut f.stream(i));
            assert_eq!(d.alice, Detection::Missed);
            assert_eq!(d.bob, Detection::Plus);
        }
    }

    #[test]
    fn coincidences_scale_with_efficiency_squared() {
        let det = DetectorConfig::symmetric(0.75).unwrap();
        let f = family(Purpose::Detection);
        let n = 100_000;
        let c = (0..n)
            .filter(|&i| {
                let d = apply_detection(plus_pair(), &det, &mut f.stream(i));
                d.alice.is_plus() && d.bob.is_plus()
            })
            .count();
        let rate = c as f64 / n as f64;
        assert!((rate - 0.5625).abs() < 0.005, "{rate}");
    }

    #[test]
    fn empty_windows_blank_both_sides() {
        let det = DetectorConfig::new(1.0, 1.0, 1.0).unwrap();
        let d = apply_detection(plus_pair(), &det, &mut family(Purpose::Detection).stream(0));
        assert!(d.empty_window);
        assert_eq!((d.alice, d.bob), (Detection::Missed, Detection::Missed));
    }

    #[test]
    fn detector_config_validates() {
        assert!(DetectorConfig::new(-0.1, 1.0, 0.0).is_err());
        assert!(DetectorConfig::new(1.0, 1.1, 0.0).is_err());
        assert!(DetectorConfig::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn schedule_is_reproducible_and_balanced() {
        let f = family(Purpose::Settings);
        assert_eq!(schedule_settings(4, &f).unwrap(), schedule_settings(4, &f).unwrap());
        assert!(schedule_settings(0, &f).is_err());

        let n = 100_000;
        let mut counts = [0u64; 4];
        for p in schedule_settings(n, &f).unwrap() {
            counts[p.index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    fn records(n: u64) -> Vec<TrialRecord> {
        (0..n)
            .map(|i| TrialRecord::new(i, SettingPair::from_index((i % 4) as usize), i % 2 == 0, i % 3 == 0))
            .collect()
    }

    #[test]
    fn flip_rate_zero_and_one() {
        let f = family(Purpose::Noise);
        let orig = records(100);
        let mut r = orig.clone();
        bit_flip_noise(&mut r, 0.0, &f).unwrap();
        assert_eq!(r, orig);
        bit_flip_noise(&mut r, 1.0, &f).unwrap();
        for (a, b) in r.iter().zip(&orig) {
            assert_eq!(a.alice_detect, !b.alice_detect);
            assert_eq!(a.bob_detect, !b.bob_detect);
        }
        assert!(bit_flip_noise(&mut r, 1.5, &f).is_err());
    }

    #[test]
    fn flip_fraction_matches_rate() {
        let f = family(Purpose::Noise);
        let orig = records(1_000_000);
        let mut r = orig.clone();
        bit_flip_noise(&mut r, 0.01, &f).unwrap();
        let n = orig.len() as f64;
        let alice = r
            .iter()
            .zip(&orig)
            .filter(|(a, b)| a.alice_detect != b.alice_detect)
            .count() as f64
            / n;
        let bob = r
            .iter()
            .zip(&orig)
            .filter(|(a, b)| a.bob_detect != b.bob_detect)
            .count() as f64
            / n;
        assert!((alice - 0.01).abs() < 0.001, "{alice}");
        assert!((bob - 0.01).abs() < 0.001, "{bob}");
    }

    #[test]
    fn detection_does_not_depend_on_record_order() {
        let det = DetectorConfig::new(0.7, 0.6, 0.1).unwrap();
        let f = family(Purpose::Detection);
        let forward: Vec<_> = (0..300)
            .map(|i| apply_detection(plus_pair(), &det, &mut f.stream(i)))
            .collect();
        let backward: Vec<_> = (0..300)
            .rev()
            .map(|i| apply_detection(plus_pair(), &det, &mut f.stream(i)))
            .collect();
        assert!(forward.iter().eq(backward.iter().rev()));
    }
}
