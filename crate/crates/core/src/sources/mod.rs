//! Trial-outcome generators.
//!
//! Sources emit two-channel outcomes per side ([`Detection`]): `Plus` is the
//! polarizer-transmitted channel, which is what the single-channel CH
//! analysis counts as a detection; `Minus` is the orthogonal channel;
//! `Missed` means no click at all.

mod catalog;
mod local;
mod quantum;

use alloc::vec::Vec;

pub use catalog::{builtin_models, lookup, CatalogEntry};
pub use local::{
    sample_local, CosineSign, DetectionBiased, Emission, LocalModel, LocalResponse, SharedCoin, SourceRngs,
};
pub use quantum::{quantum_joint_probs, quantum_table, JointDistribution, QuantumState};

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Detection {
    Plus,
    Minus,
    Missed,
}

impl Detection {
    /// The single-channel detect flag.
    pub fn is_plus(self) -> bool {
        self == Detection::Plus
    }

    /// Whether either channel fired.
    pub fn clicked(self) -> bool {
        self != Detection::Missed
    }
}

/// Source output for one trial, before detector losses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawPair {
    pub alice: Detection,
    pub bob: Detection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureComponent {
    pub model: LocalModel,
    /// Consecutive trials this component stays active for.
    pub block_length: u64,
}

/// A local source whose active component changes over time: components take
/// turns in blocks of their own length, cycling in order.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalMixture {
    components: Vec<MixtureComponent>,
    cycle: u64,
}

impl TemporalMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("a temporal mixture needs at least one component".into()));
        }
        if components.iter().any(|c| c.block_length == 0) {
            return Err(Error::Invalid("mixture block lengths must be positive".into()));
        }
        let cycle = components.iter().map(|c| c.block_length).sum();
        Ok(Self { components, cycle })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Index of the component active for trial `index`. With two components
    /// of block length `L` this is `⌊index / L⌋ mod 2`.
    pub fn component_at(&self, index: u64) -> usize {
        let mut t = index % self.cycle;
        for (i, c) in self.components.iter().enumerate() {
            if t < c.block_length {
                return i;
            }
            t -= c.block_length;
        }
        unreachable!("offset within cycle always lands in a block")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceModel {
    /// Samples the quantum joint distribution given both settings. This is
    /// nonlocal by construction.
    Quantum(QuantumState),
    Local(LocalModel),
    Mixture(TemporalMixture),
}

impl SourceModel {
    /// Raw outcomes for trial `index` at polarizer angles `a` and `b`.
    pub fn sample_trial(&self, index: u64, a: f64, b: f64, rngs: &mut SourceRngs) -> RawPair {
        let (alice, bob) = match self {
            SourceModel::Quantum(state) => {
                let d = quantum_joint_probs(*state, a, b);
                let u: f64 = rngs.shared.gen();
                let (pa, pb) = if u < d.both {
                    (true, true)
                } else if u < d.both + d.alice_only {
                    (true, false)
                } else if u < d.both + d.alice_only + d.bob_only {
                    (false, true)
                } else {
                    (false, false)
                };
                let ch = |p| if p { Detection::Plus } else { Detection::Minus };
                (ch(pa), ch(pb))
            }
            SourceModel::Local(m) => m.sample(a, b, rngs),
            SourceModel::Mixture(mix) => mix.components[mix.component_at(index)].model.sample(a, b, rngs),
        };
        RawPair { alice, bob }
    }

    /// True for models whose responses are local (everything but `Quantum`).
    pub fn is_local(&self) -> bool {
        !matches!(self, SourceModel::Quantum(_))
    }
}
