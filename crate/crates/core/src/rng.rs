//! Counter-style random streams.
//!
//! Every random draw in a simulation comes from a stream identified by
//! `(seed, purpose, trial index)`. A stream is a ChaCha8 generator keyed by
//! `(seed, purpose)` with the trial index as its 64-bit stream id, so trial
//! `i` sees the same numbers no matter which worker generates it or in which
//! order trials are produced.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// What a stream family is used for. Distinct purposes get unrelated keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Settings = 1,
    Source = 2,
    AliceLocal = 3,
    BobLocal = 4,
    Detection = 5,
    Leakage = 6,
    Noise = 7,
    Fuzz = 8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamFamily {
    key: [u8; 32],
}

impl StreamFamily {
    pub fn new(seed: u64, purpose: Purpose) -> Self {
        let mut state = seed ^ (purpose as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { key }
    }

    /// The stream for one trial (or record, or fuzz sample).
    pub fn stream(&self, index: u64) -> TrialRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

/// All stream families used by the trial pipeline, derived from one seed.
#[derive(Clone, Debug)]
pub struct Streams {
    pub settings: StreamFamily,
    pub source: StreamFamily,
    pub alice_local: StreamFamily,
    pub bob_local: StreamFamily,
    pub detection: StreamFamily,
    pub leakage: StreamFamily,
    pub noise: StreamFamily,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            settings: StreamFamily::new(seed, Purpose::Settings),
            source: StreamFamily::new(seed, Purpose::Source),
            alice_local: StreamFamily::new(seed, Purpose::AliceLocal),
            bob_local: StreamFamily::new(seed, Purpose::BobLocal),
            detection: StreamFamily::new(seed, Purpose::Detection),
            leakage: StreamFamily::new(seed, Purpose::Leakage),
            noise: StreamFamily::new(seed, Purpose::Noise),
        }
    }
}

/// An independent seed for sub-run `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut state = seed ^ index.wrapping_mul(0xA24B_AED4_963E_E407);
    splitmix64(&mut state)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
