//! Local models against exact expectations and the CH bound.

use std::f64::consts::PI;

use chlab_core::analysis::{accumulate_counts, ch_standard_errors, estimate_probabilities, MarginalMode, Sequential};
use chlab_core::channel::DetectorConfig;
use chlab_core::experiment::Experiment;
use chlab_core::inequality::{ch_values, chsh_fair_sampled};
use chlab_core::sources::{builtin_models, lookup, SourceModel};
use chlab_core::AngleSet;

/// Cosine-sign expectation by direct integration over λ: each side is `+`
/// on a half-circle, so `P(++)` is the overlap of two intervals.
fn cosine_sign_exact(angles: &AngleSet) -> [f64; 4] {
    let n = 200_000;
    let plus = |s: f64, l: f64| (2.0 * (s - l)).cos() > 0.0;
    let mut j = [0.0; 4];
    let mut pa = [0.0; 2];
    let mut pb = [0.0; 2];
    for i in 0..n {
        let l = (i as f64 + 0.5) * PI / n as f64;
        for (k, p) in chlab_core::SettingPair::ALL.iter().enumerate() {
            j[k] += (plus(angles.alice_angle(p.alice), l) && plus(angles.bob_angle(p.bob), l)) as u8 as f64;
        }
        for s in chlab_core::Setting::BOTH {
            pa[s.index()] += plus(angles.alice_angle(s), l) as u8 as f64;
            pb[s.index()] += plus(angles.bob_angle(s), l) as u8 as f64;
        }
    }
    let nf = n as f64;
    let (j, pa, pb) = (j.map(|x| x / nf), pa.map(|x| x / nf), pb.map(|x| x / nf));
    [
        j[0] - j[1] + j[2] + j[3] - pa[1] - pb[0],
        -j[0] + j[1] + j[2] + j[3] - pa[1] - pb[1],
        j[0] + j[1] - j[2] + j[3] - pa[0] - pb[1],
        j[0] + j[1] + j[2] - j[3] - pa[0] - pb[0],
    ]
}

#[test]
fn cosine_sign_matches_integration() {
    let exact = cosine_sign_exact(&AngleSet::ch_optimal());
    for (e, want) in exact.iter().zip([0.0, -0.5, -0.5, -0.5]) {
        assert!((e - want).abs() < 1e-4, "{exact:?}");
    }
    let mut e = Experiment::new(lookup("cosine-sign").unwrap().model);
    e.seed = 8;
    let run = e.run(400_000, &Sequential).unwrap();
    let c = accumulate_counts(&run.records);
    let v = ch_values(&estimate_probabilities(&c, MarginalMode::Pooled).unwrap()).values();
    let se = ch_standard_errors(&c, MarginalMode::Pooled).unwrap();
    for i in 0..4 {
        assert!(
            (v[i] - exact[i]).abs() < 4.0 * se[i].max(1e-4),
            "variant {i}: {} vs {}",
            v[i],
            exact[i]
        );
    }
}

#[test]
fn repeated_runs_respect_the_bound() {
    // R = 20 independent repetitions per local model, no leakage
    for entry in builtin_models().into_iter().filter(|e| e.model.is_local()) {
        let reps = 20;
        let mut vals = vec![[0.0; 4]; reps];
        for (r, slot) in vals.iter_mut().enumerate() {
            let mut e = Experiment::new(entry.model.clone());
            e.angles = entry.angles;
            e.detector = DetectorConfig::new(0.9, 0.85, 0.02).unwrap();
            e.seed = 1000 + r as u64;
            let run = e.run(20_000, &Sequential).unwrap();
            *slot = ch_values(&estimate_probabilities(&accumulate_counts(&run.records), MarginalMode::Pooled).unwrap())
                .values();
        }
        for i in 0..4 {
            let mean = vals.iter().map(|v| v[i]).sum::<f64>() / reps as f64;
            let var = vals.iter().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt();
            assert!(mean <= 3.0 * se, "{} variant {i}: mean {mean}, se {se}", entry.name);
        }
    }
}

#[test]
fn detection_bias_fools_chsh_but_not_ch() {
    let entry = lookup("detection-biased").unwrap();
    assert!(matches!(entry.model, SourceModel::Local(_)));
    let mut e = Experiment::new(entry.model);
    e.seed = 77;
    let run = e.run(400_000, &Sequential).unwrap();
    let s = chsh_fair_sampled(&run.coincidences.pairs).unwrap();
    assert!((s - 3.519).abs() < 0.05, "S = {s}");
    let v = ch_values(&estimate_probabilities(&accumulate_counts(&run.records), MarginalMode::Pooled).unwrap());
    let expected = [-0.0821, -0.4357, -0.4357, -0.4357];
    for i in 0..4 {
        assert!((v.value(i) - expected[i]).abs() < 0.01, "{:?}", v.values());
    }
}
