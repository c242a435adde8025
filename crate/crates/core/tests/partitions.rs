//! The 50% rule on constructed streams.

use chlab_core::analysis::{
    accumulate_counts, bierhorst_mixture_test, ch_standard_errors, estimate_probabilities, partition_and_score,
    partition_bounds, score_records, MarginalMode, Sequential,
};
use chlab_core::channel::{
    bit_flip_noise, DetectorConfig, ForgeTarget, Forgery, ForgingStrategy, Leakage, LeakageMode,
};
use chlab_core::experiment::Experiment;
use chlab_core::rng::{Purpose, StreamFamily};
use chlab_core::sources::{LocalModel, MixtureComponent, QuantumState, SharedCoin, SourceModel, TemporalMixture};

fn quantum_run(eta: f64, trials: u64, seed: u64) -> Vec<chlab_core::analysis::TrialRecord> {
    let mut e = Experiment::new(SourceModel::Quantum(QuantumState::maximal()));
    e.detector = DetectorConfig::symmetric(eta).unwrap();
    e.seed = seed;
    e.run(trials, &Sequential).unwrap().records
}

#[test]
fn violating_stream_violates_in_nearly_every_partition() {
    let recs = quantum_run(1.0, 400_000, 5);
    let rep = partition_and_score(&recs, 40, 1000, MarginalMode::Pooled).unwrap();
    assert!(rep.fractions[0] >= 0.95, "{:?}", rep.fractions);
}

#[test]
fn concentrated_noise_gives_majority_fraction_without_overall_violation() {
    // variant 0 ≈ 0.088 at η = 0.9; fully scrambled blocks sit at −0.5
    let k = 50;
    let mut recs = quantum_run(0.9, 500_000, 6);
    let bounds = partition_bounds(recs.len(), k);
    let noise = StreamFamily::new(6, Purpose::Noise);
    for b in bounds.iter().step_by(5) {
        bit_flip_noise(&mut recs[b.clone()], 0.5, &noise).unwrap();
    }
    let overall = score_records(&recs, MarginalMode::Pooled).unwrap();
    assert!(overall.value(0) < 0.0, "overall {}", overall.value(0));
    let rep = partition_and_score(&recs, k, 1000, MarginalMode::Pooled).unwrap();
    assert_eq!(rep.partitions.len(), k);
    assert!(rep.fractions[0] > 0.7, "{:?}", rep.fractions);
}

#[test]
fn boundary_source_violates_half_the_time() {
    let mut e = Experiment::new(SourceModel::Local(LocalModel::SharedCoin(
        SharedCoin::symmetric(0.5).unwrap(),
    )));
    e.seed = 12;
    let recs = e.run(400_000, &Sequential).unwrap().records;
    let rep = partition_and_score(&recs, 100, 1000, MarginalMode::Pooled).unwrap();
    let (lo, hi) = rep.band();
    for f in rep.fractions {
        assert!((lo..=hi).contains(&f), "{:?}", rep.fractions);
    }
}

fn shared(p: f64) -> LocalModel {
    LocalModel::SharedCoin(SharedCoin::symmetric(p).unwrap())
}

#[test]
fn degenerate_mixture_scores_like_its_component() {
    let comp = MixtureComponent {
        model: shared(0.4),
        block_length: 1000,
    };
    let mix = TemporalMixture::new(vec![comp, comp]).unwrap();
    let via_mix = bierhorst_mixture_test(&mix, Leakage::none(), 100, 200_000, 3, &Sequential).unwrap();
    let mut e = Experiment::new(SourceModel::Local(shared(0.4)));
    e.seed = 3;
    let recs = e.run(200_000, &Sequential).unwrap().records;
    let single = partition_and_score(&recs, 100, 1000, MarginalMode::Pooled).unwrap();
    assert_eq!(via_mix, single);
}

#[test]
fn leakage_dominates_a_mixture() {
    let comps = vec![
        MixtureComponent {
            model: shared(0.25),
            block_length: 1000,
        },
        MixtureComponent {
            model: shared(0.75),
            block_length: 3000,
        },
    ];
    let mix = TemporalMixture::new(comps).unwrap();
    let strategy =
        ForgingStrategy::new(Forgery::ExactConditional, ForgeTarget::Quantum(QuantumState::maximal())).unwrap();
    let leak = Leakage::new(LeakageMode::Both, Some(strategy)).unwrap();
    let rep = bierhorst_mixture_test(&mix, leak, 100, 1_000_000, 4, &Sequential).unwrap();
    assert!(rep.fractions[0] >= 0.95, "{:?}", rep.fractions);
}

#[test]
fn pooled_and_per_pair_marginals_agree_for_pi_sources() {
    let recs = quantum_run(0.8, 400_000, 9);
    let c = accumulate_counts(&recs);
    let pooled = estimate_probabilities(&c, MarginalMode::Pooled).unwrap();
    let per = estimate_probabilities(&c, MarginalMode::PerPair).unwrap();
    let se = ch_standard_errors(&c, MarginalMode::PerPair).unwrap();
    let vp = chlab_core::inequality::ch_values(&pooled).values();
    let vq = chlab_core::inequality::ch_values(&per).values();
    for i in 0..4 {
        assert!(
            (vp[i] - vq[i]).abs() <= 3.0 * se[i],
            "variant {i}: {} vs {}",
            vp[i],
            vq[i]
        );
    }
    for s in chlab_core::Setting::BOTH {
        let n = (c.total_trials() / 4) as f64;
        let band = 3.0 * (0.25 / n).sqrt() * 2.0;
        assert!((pooled.alice(s) - per.alice(s)).abs() <= band);
        assert!((pooled.bob(s) - per.bob(s)).abs() <= band);
    }
}
