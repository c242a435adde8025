use libm::sqrt;

use super::CountsTable;
use crate::error::{Error, Result};
use crate::inequality::{PairMarginals, ProbabilityTable, CH_VARIANTS};
use crate::{Setting, SettingPair};

/// How single-detection probabilities are estimated from counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MarginalMode {
    /// `P(A|a)` from every trial with Alice at `a`, whatever Bob's setting.
    #[default]
    Pooled,
    /// `P(A|a)` only from trials at `(a, PARTNER)`; likewise for Bob.
    PerPair,
}

impl MarginalMode {
    /// Remote setting the per-pair mode takes singles from.
    pub const PARTNER: Setting = Setting::Plain;

    pub fn name(self) -> &'static str {
        match self {
            MarginalMode::Pooled => "pooled",
            MarginalMode::PerPair => "per-pair",
        }
    }

    fn alice_pairs(self, a: Setting) -> &'static [SettingPair] {
        match (self, a) {
            (MarginalMode::Pooled, Setting::Plain) => &[PP, PQ],
            (MarginalMode::Pooled, Setting::Prime) => &[QP, QQ],
            (MarginalMode::PerPair, Setting::Plain) => &[PP],
            (MarginalMode::PerPair, Setting::Prime) => &[QP],
        }
    }

    fn bob_pairs(self, b: Setting) -> &'static [SettingPair] {
        match (self, b) {
            (MarginalMode::Pooled, Setting::Plain) => &[PP, QP],
            (MarginalMode::Pooled, Setting::Prime) => &[PQ, QQ],
            (MarginalMode::PerPair, Setting::Plain) => &[PP],
            (MarginalMode::PerPair, Setting::Prime) => &[PQ],
        }
    }
}

// P = unprimed, Q = primed; Alice first
const PP: SettingPair = SettingPair::new(Setting::Plain, Setting::Plain);
const PQ: SettingPair = SettingPair::new(Setting::Plain, Setting::Prime);
const QP: SettingPair = SettingPair::new(Setting::Prime, Setting::Plain);
const QQ: SettingPair = SettingPair::new(Setting::Prime, Setting::Prime);

impl core::fmt::Display for MarginalMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for MarginalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(MarginalMode::Pooled),
            "per-pair" => Ok(MarginalMode::PerPair),
            other => Err(Error::Invalid(alloc::format!(
                "unknown marginal mode `{other}` (expected `pooled` or `per-pair`)"
            ))),
        }
    }
}

fn require_all_pairs(counts: &CountsTable) -> Result<()> {
    for p in SettingPair::ALL {
        if counts.pair(p).trials == 0 {
            return Err(Error::MissingPair(p));
        }
    }
    Ok(())
}

fn rate(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}

fn alice_marginal(counts: &CountsTable, mode: MarginalMode, a: Setting) -> (f64, u64) {
    let (hits, n) = mode
        .alice_pairs(a)
        .iter()
        .map(|p| counts.pair(*p))
        .fold((0, 0), |(h, n), c| (h + c.alice, n + c.trials));
    (rate(hits, n), n)
}

fn bob_marginal(counts: &CountsTable, mode: MarginalMode, b: Setting) -> (f64, u64) {
    let (hits, n) = mode
        .bob_pairs(b)
        .iter()
        .map(|p| counts.pair(*p))
        .fold((0, 0), |(h, n), c| (h + c.bob, n + c.trials));
    (rate(hits, n), n)
}

/// Relative frequencies over the four setting pairs.
///
/// The table's tolerance is the largest gap between a pair's own single rate
/// and the marginal used for it, which bounds how far an estimated joint can
/// exceed the marginals it is compared against.
pub fn estimate_probabilities(counts: &CountsTable, mode: MarginalMode) -> Result<ProbabilityTable> {
    require_all_pairs(counts)?;
    let mut joint = [0.0; 4];
    for p in SettingPair::ALL {
        let c = counts.pair(p);
        joint[p.index()] = rate(c.coincidences, c.trials);
    }
    let alice = Setting::BOTH.map(|a| alice_marginal(counts, mode, a).0);
    let bob = Setting::BOTH.map(|b| bob_marginal(counts, mode, b).0);
    let mut tolerance: f64 = 0.0;
    for p in SettingPair::ALL {
        let c = counts.pair(p);
        tolerance = tolerance
            .max((rate(c.alice, c.trials) - alice[p.alice.index()]).abs())
            .max((rate(c.bob, c.trials) - bob[p.bob.index()]).abs());
    }
    ProbabilityTable::new(joint, alice, bob, tolerance)
}

/// `P(AB|a,b)`, `P(A|a,b)`, `P(B|a,b)` per pair.
pub fn pair_marginals(counts: &CountsTable) -> Result<[PairMarginals; 4]> {
    require_all_pairs(counts)?;
    Ok(SettingPair::ALL.map(|p| {
        let c = counts.pair(p);
        PairMarginals {
            joint: rate(c.coincidences, c.trials),
            alice: rate(c.alice, c.trials),
            bob: rate(c.bob, c.trials),
        }
    }))
}

/// Binomial standard errors of every entry of [`estimate_probabilities`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableErrors {
    pub joint: [f64; 4],
    pub alice: [f64; 2],
    pub bob: [f64; 2],
}

fn binomial_se(p: f64, n: u64) -> f64 {
    sqrt(p * (1.0 - p) / n as f64)
}

pub fn table_standard_errors(counts: &CountsTable, mode: MarginalMode) -> Result<TableErrors> {
    require_all_pairs(counts)?;
    Ok(TableErrors {
        joint: SettingPair::ALL.map(|p| {
            let c = counts.pair(p);
            binomial_se(rate(c.coincidences, c.trials), c.trials)
        }),
        alice: Setting::BOTH.map(|a| {
            let (r, n) = alice_marginal(counts, mode, a);
            binomial_se(r, n)
        }),
        bob: Setting::BOTH.map(|b| {
            let (r, n) = bob_marginal(counts, mode, b);
            binomial_se(r, n)
        }),
    })
}

/// Standard error of each CH variant estimate.
///
/// Each variant is a linear combination of per-trial indicators (coincidence,
/// Alice single, Bob single) averaged within pairs. Trials of different pairs
/// are independent, so the variance is the sum over pairs of the per-pair
/// variance of the trial's weighted contribution, using observed rates.
pub fn ch_standard_errors(counts: &CountsTable, mode: MarginalMode) -> Result<[f64; 4]> {
    require_all_pairs(counts)?;
    Ok(CH_VARIANTS.map(|v| {
        let mut var = 0.0;
        for p in SettingPair::ALL {
            let c = counts.pair(p);
            let n = c.trials as f64;
            let wj = v.joint_signs[p.index()] / n;
            let wa = if mode.alice_pairs(v.alice).contains(&p) {
                -1.0 / alice_marginal(counts, mode, v.alice).1 as f64
            } else {
                0.0
            };
            let wb = if mode.bob_pairs(v.bob).contains(&p) {
                -1.0 / bob_marginal(counts, mode, v.bob).1 as f64
            } else {
                0.0
            };
            let (j, pa, pb) = (c.coincidences as f64 / n, c.alice as f64 / n, c.bob as f64 / n);
            // a coincidence implies both singles, so every cross moment is J
            let mean = wj * j + wa * pa + wb * pb;
            let second = wj * wj * j + wa * wa * pa + wb * wb * pb + 2.0 * (wj * wa + wj * wb + wa * wb) * j;
            var += n * (second - mean * mean).max(0.0);
        }
        sqrt(var)
    }))
}

/// Parameter-independence check with per-comparison standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiCheck {
    /// Largest absolute marginal difference, as in [`crate::inequality::pi_residual`].
    pub residual: f64,
    /// Largest `|difference| / standard error` over the four comparisons.
    pub max_z: f64,
}

pub fn pi_check(counts: &CountsTable) -> Result<PiCheck> {
    require_all_pairs(counts)?;
    let mut residual: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    let mut compare = |(h1, n1): (u64, u64), (h2, n2): (u64, u64)| {
        let (p1, p2) = (rate(h1, n1), rate(h2, n2));
        let d = (p1 - p2).abs();
        let se = sqrt(p1 * (1.0 - p1) / n1 as f64 + p2 * (1.0 - p2) / n2 as f64);
        residual = residual.max(d);
        let z = if se > 0.0 {
            d / se
        } else if d > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        max_z = max_z.max(z);
    };
    for s in Setting::BOTH {
        let x = counts.pair(SettingPair::new(s, Setting::Plain));
        let y = counts.pair(SettingPair::new(s, Setting::Prime));
        compare((x.alice, x.trials), (y.alice, y.trials));
        let x = counts.pair(SettingPair::new(Setting::Plain, s));
        let y = counts.pair(SettingPair::new(Setting::Prime, s));
        compare((x.bob, x.trials), (y.bob, y.trials));
    }
    Ok(PiCheck { residual, max_z })
}
