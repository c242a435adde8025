//! Local hidden-variable models.
//!
//! A model draws its hidden variable λ once per trial, before either setting
//! is consulted. Each side then answers from its own setting, λ, and its own
//! local random stream. [`LocalResponse`] has no way to pass the remote
//! setting, so locality holds by construction.

use core::f64::consts::PI;

use libm::{cos, pow};
use rand::Rng;

use super::Detection;
use crate::error::{check_probability, Error, Result};
use crate::rng::TrialRng;

pub trait LocalResponse {
    type Hidden: Copy;

    fn draw_hidden(&self, rng: &mut TrialRng) -> Self::Hidden;

    fn alice(&self, setting: f64, hidden: Self::Hidden, local: &mut TrialRng) -> Detection;

    fn bob(&self, setting: f64, hidden: Self::Hidden, local: &mut TrialRng) -> Detection;
}

fn uniform_angle(rng: &mut TrialRng) -> f64 {
    rng.gen::<f64>() * PI
}

fn sign_channel(c: f64) -> Detection {
    if c > 0.0 {
        Detection::Plus
    } else {
        Detection::Minus
    }
}

/// Deterministic polarization model: λ uniform on [0, π), a side reports `+`
/// iff `cos 2(setting − λ) > 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CosineSign;

impl LocalResponse for CosineSign {
    type Hidden = f64;

    fn draw_hidden(&self, rng: &mut TrialRng) -> f64 {
        uniform_angle(rng)
    }

    fn alice(&self, setting: f64, lambda: f64, _: &mut TrialRng) -> Detection {
        sign_channel(cos(2.0 * (setting - lambda)))
    }

    fn bob(&self, setting: f64, lambda: f64, _: &mut TrialRng) -> Detection {
        sign_channel(cos(2.0 * (setting - lambda)))
    }
}

/// Cosine-sign outcomes, but each side only registers a click with
/// probability `|cos 2(setting − λ)|^exponent`. Missed trials carry no sign.
///
/// Post-selecting coincidences favours λ aligned with both settings, which
/// inflates fair-sampled CHSH correlators far beyond the local bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionBiased {
    exponent: f64,
}

impl DetectionBiased {
    pub fn new(exponent: f64) -> Result<Self> {
        if exponent >= 0.0 && exponent.is_finite() {
            Ok(Self { exponent })
        } else {
            Err(Error::domain("exponent", exponent, "[0, inf)"))
        }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    fn respond(&self, setting: f64, lambda: f64, local: &mut TrialRng) -> Detection {
        let c = cos(2.0 * (setting - lambda));
        let u: f64 = local.gen();
        if u < pow(c.abs(), self.exponent) {
            sign_channel(c)
        } else {
            Detection::Missed
        }
    }
}

impl LocalResponse for DetectionBiased {
    type Hidden = f64;

    fn draw_hidden(&self, rng: &mut TrialRng) -> f64 {
        uniform_angle(rng)
    }

    fn alice(&self, setting: f64, lambda: f64, local: &mut TrialRng) -> Detection {
        self.respond(setting, lambda, local)
    }

    fn bob(&self, setting: f64, lambda: f64, local: &mut TrialRng) -> Detection {
        self.respond(setting, lambda, local)
    }
}

/// Which sides an emission reaches, for [`SharedCoin`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emission {
    Pair,
    AliceOnly,
    BobOnly,
    Empty,
}

/// Setting-independent emission model. λ picks which sides receive a photon;
/// a side that receives one reports `+` at every setting, otherwise `−`.
///
/// With both asymmetries zero every CH variant has expectation exactly zero,
/// so empirical values straddle the bound: the boundary case for the
/// partitioned 50% statistic. Any positive asymmetry pushes the expectation
/// strictly below zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharedCoin {
    pair_rate: f64,
    alice_only: f64,
    bob_only: f64,
}

impl SharedCoin {
    pub fn new(pair_rate: f64, alice_only: f64, bob_only: f64) -> Result<Self> {
        check_probability("pair_rate", pair_rate)?;
        check_probability("alice_only", alice_only)?;
        check_probability("bob_only", bob_only)?;
        let total = pair_rate + alice_only + bob_only;
        if total > 1.0 + 1e-12 {
            return Err(Error::domain("pair_rate + alice_only + bob_only", total, "[0, 1]"));
        }
        Ok(Self {
            pair_rate,
            alice_only,
            bob_only,
        })
    }

    pub fn symmetric(pair_rate: f64) -> Result<Self> {
        Self::new(pair_rate, 0.0, 0.0)
    }

    pub fn pair_rate(&self) -> f64 {
        self.pair_rate
    }

    pub fn alice_only(&self) -> f64 {
        self.alice_only
    }

    pub fn bob_only(&self) -> f64 {
        self.bob_only
    }
}

impl LocalResponse for SharedCoin {
    type Hidden = Emission;

    fn draw_hidden(&self, rng: &mut TrialRng) -> Emission {
        let u: f64 = rng.gen();
        if u < self.pair_rate {
            Emission::Pair
        } else if u < self.pair_rate + self.alice_only {
            Emission::AliceOnly
        } else if u < self.pair_rate + self.alice_only + self.bob_only {
            Emission::BobOnly
        } else {
            Emission::Empty
        }
    }

    fn alice(&self, _setting: f64, e: Emission, _: &mut TrialRng) -> Detection {
        match e {
            Emission::Pair | Emission::AliceOnly => Detection::Plus,
            _ => Detection::Minus,
        }
    }

    fn bob(&self, _setting: f64, e: Emission, _: &mut TrialRng) -> Detection {
        match e {
            Emission::Pair | Emission::BobOnly => Detection::Plus,
            _ => Detection::Minus,
        }
    }
}

/// The built-in local models behind one type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalModel {
    CosineSign(CosineSign),
    DetectionBiased(DetectionBiased),
    SharedCoin(SharedCoin),
}

/// Per-trial random streams available to a source: one shared stream for λ
/// (or the quantum draw) and one private stream per side.
pub struct SourceRngs {
    pub shared: TrialRng,
    pub alice: TrialRng,
    pub bob: TrialRng,
}

/// Draws λ, then evaluates each side with only its own setting.
pub fn sample_local<M: LocalResponse>(model: &M, a: f64, b: f64, rngs: &mut SourceRngs) -> (Detection, Detection) {
    let hidden = model.draw_hidden(&mut rngs.shared);
    let alice = model.alice(a, hidden, &mut rngs.alice);
    let bob = model.bob(b, hidden, &mut rngs.bob);
    (alice, bob)
}

impl LocalModel {
    pub fn sample(&self, a: f64, b: f64, rngs: &mut SourceRngs) -> (Detection, Detection) {
        match self {
            LocalModel::CosineSign(m) => sample_local(m, a, b, rngs),
            LocalModel::DetectionBiased(m) => sample_local(m, a, b, rngs),
            LocalModel::SharedCoin(m) => sample_local(m, a, b, rngs),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LocalModel::CosineSign(_) => "cosine-sign",
            LocalModel::DetectionBiased(_) => "detection-biased",
            LocalModel::SharedCoin(_) => "shared-coin",
        }
    }
}
