use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    CosineSign, DetectionBiased, LocalModel, MixtureComponent, QuantumState, SharedCoin, SourceModel, TemporalMixture,
};
use crate::error::{Error, Result};
use crate::optimize::ch_optimal_angles;
use crate::AngleSet;

/// State parameter of the built-in nonmaximal source.
pub const NONMAXIMAL_R: f64 = 0.3;

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub model: SourceModel,
    pub angles: AngleSet,
}

/// The named sources shipped with the simulator.
///
/// | name | kind | ρ(λ) / parameters |
/// |---|---|---|
/// | `quantum-maximal` | quantum | r = π/4 |
/// | `quantum-nonmaximal` | quantum | r = 0.3, CH-optimal angles at unit efficiency |
/// | `cosine-sign` | local | λ uniform on [0, π) |
/// | `detection-biased` | local | λ uniform on [0, π), click probability `\|cos 2(θ−λ)\|` |
/// | `shared-coin` | local | pair emitted with probability ½, no one-sided emissions |
/// | `bierhorst-mixture` | temporal mixture | shared-coin 0.25 (1000 trials), shared-coin 0.75 (3000 trials) |
pub fn builtin_models() -> Vec<CatalogEntry> {
    let standard = AngleSet::ch_optimal();
    let nonmax = QuantumState::new(NONMAXIMAL_R).expect("constant in range");
    vec![
        CatalogEntry {
            name: "quantum-maximal",
            summary: "quantum joint sampler, maximally entangled state",
            model: SourceModel::Quantum(QuantumState::maximal()),
            angles: standard,
        },
        CatalogEntry {
            name: "quantum-nonmaximal",
            summary: "quantum joint sampler, cos r|HH> + sin r|VV> with r = 0.3",
            model: SourceModel::Quantum(nonmax),
            angles: ch_optimal_angles(nonmax, 1.0).angles,
        },
        CatalogEntry {
            name: "cosine-sign",
            summary: "deterministic local model: + iff cos 2(setting - lambda) > 0",
            model: SourceModel::Local(LocalModel::CosineSign(CosineSign)),
            angles: standard,
        },
        CatalogEntry {
            name: "detection-biased",
            summary: "cosine-sign outcomes clicking with probability |cos 2(setting - lambda)|",
            model: SourceModel::Local(LocalModel::DetectionBiased(
                DetectionBiased::new(1.0).expect("constant in range"),
            )),
            angles: standard,
        },
        CatalogEntry {
            name: "shared-coin",
            summary: "setting-independent pair emission at rate 1/2; saturates every CH variant",
            model: SourceModel::Local(LocalModel::SharedCoin(
                SharedCoin::symmetric(0.5).expect("constant in range"),
            )),
            angles: standard,
        },
        CatalogEntry {
            name: "bierhorst-mixture",
            summary: "temporal mixture of shared-coin sources with pair rates 0.25 and 0.75",
            model: SourceModel::Mixture(bierhorst_mixture(0.25, 1000, 0.75, 3000)),
            angles: standard,
        },
    ]
}

/// Two shared-coin components alternating in blocks. Block lengths set the
/// mixture weights.
pub(crate) fn bierhorst_mixture(rate0: f64, block0: u64, rate1: f64, block1: u64) -> TemporalMixture {
    let comp = |rate, block_length| MixtureComponent {
        model: LocalModel::SharedCoin(SharedCoin::symmetric(rate).expect("rate in range")),
        block_length,
    };
    TemporalMixture::new(vec![comp(rate0, block0), comp(rate1, block1)]).expect("valid components")
}

pub fn lookup(name: &str) -> Result<CatalogEntry> {
    builtin_models()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::NotFound(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_known_and_unknown() {
        assert!(lookup("cosine-sign").is_ok());
        let biased = lookup("detection-biased").unwrap();
        match biased.model {
            SourceModel::Local(LocalModel::DetectionBiased(m)) => assert_eq!(m.exponent(), 1.0),
            other => panic!("unexpected model {other:?}"),
        }
        assert_eq!(lookup("nonexistent"), Err(Error::NotFound("nonexistent".into())));
    }

    #[test]
    fn names_are_unique() {
        let models = builtin_models();
        for (i, a) in models.iter().enumerate() {
            for b in &models[i + 1..] {
                assert_ne!(a.name, b.name);
            }
        }
    }
}
