//! Experiment configuration files (TOML).
//!
//! ```toml
//! [source]                 # required
//! kind = "quantum"         # quantum | cosine-sign | detection-biased |
//!                          # shared-coin | mixture | catalog
//! r = "45deg"              # quantum only, default π/4
//!
//! [detector]
//! eta_alice = 0.9          # default 1
//! eta_bob = 0.9            # default 1
//! empty_window_rate = 0.0
//! noise_rate = 0.0         # per-side flag flip probability
//!
//! [leakage]
//! mode = "none"            # none | outcome-only | setting-only | both
//! strategy = "exact-conditional"   # default: the one matching `mode`
//! bias = 0.1               # setting-conditional only
//! target = "quantum"       # quantum (with target_r) | table
//! target_r = 0.7853981633974483
//! # target_joint = [..4..], target_alice = [..2..], target_bob = [..2..]
//!
//! [angles]                 # all four or none; default CH-optimal
//! alpha = "67.5deg"
//! alpha_prime = "22.5deg"
//! beta = "45deg"
//! beta_prime = 0.0         # bare numbers are radians
//!
//! [run]
//! trials = 100000
//! partitions = 100
//! min_per_partition = 1000
//! seed = 0
//! marginal_mode = "pooled" # pooled | per-pair
//! include_empty_windows = true
//!
//! [scan]                   # optional, used by `chlab scan`
//! r = [0.2, 0.3, "22.5deg"]
//! eta = [0.6, 0.75, 1.0]
//! angles = "optimized"     # optimized | fixed (uses [angles])
//! trials_per_cell = 100000
//! partitions = 4
//! min_per_partition = 1000
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::{Path, PathBuf};

use chlab_core::analysis::{MarginalMode, ScanAngles, ScanSpec, DEFAULT_MIN_PER_PARTITION, DEFAULT_PARTITIONS};
use chlab_core::channel::{DetectorConfig, ForgeTarget, Forgery, ForgingStrategy, Leakage, LeakageMode};
use chlab_core::experiment::Experiment;
use chlab_core::inequality::ProbabilityTable;
use chlab_core::sources::{
    lookup, CosineSign, DetectionBiased, LocalModel, MixtureComponent, QuantumState, SharedCoin, SourceModel,
    TemporalMixture,
};
use chlab_core::AngleSet;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse config {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("invalid config value `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

/// An angle: a bare number in radians, or a string with a `deg` or `rad`
/// suffix.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AngleValue {
    Radians(f64),
    Text(String),
}

impl AngleValue {
    pub fn radians(&self, field: &str) -> Result<f64, ConfigError> {
        let v = match self {
            AngleValue::Radians(v) => *v,
            AngleValue::Text(s) => parse_angle(s).ok_or_else(|| {
                invalid(
                    field,
                    format!("`{s}` is not an angle (use radians, or a `deg`/`rad` suffix)"),
                )
            })?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(field, "angle must be finite"))
        }
    }
}

/// Parses `"22.5deg"`, `"22.5 deg"`, `"0.39rad"`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(num) = s.strip_suffix("deg") {
        num.trim().parse::<f64>().ok().map(f64::to_radians)
    } else if let Some(num) = s.strip_suffix("rad") {
        num.trim().parse::<f64>().ok()
    } else {
        None
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    source: RawSource,
    #[serde(default)]
    detector: RawDetector,
    #[serde(default)]
    leakage: RawLeakage,
    angles: Option<RawAngles>,
    #[serde(default)]
    run: RawRun,
    scan: Option<RawScan>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    kind: String,
    r: Option<AngleValue>,
    exponent: Option<f64>,
    pair_rate: Option<f64>,
    alice_only: Option<f64>,
    bob_only: Option<f64>,
    name: Option<String>,
    components: Option<Vec<RawComponent>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    kind: String,
    block_length: u64,
    exponent: Option<f64>,
    pair_rate: Option<f64>,
    alice_only: Option<f64>,
    bob_only: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    eta_alice: Option<f64>,
    eta_bob: Option<f64>,
    empty_window_rate: Option<f64>,
    noise_rate: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLeakage {
    mode: Option<String>,
    strategy: Option<String>,
    bias: Option<f64>,
    target: Option<String>,
    target_r: Option<AngleValue>,
    target_joint: Option<Vec<f64>>,
    target_alice: Option<Vec<f64>>,
    target_bob: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngles {
    alpha: Option<AngleValue>,
    alpha_prime: Option<AngleValue>,
    beta: Option<AngleValue>,
    beta_prime: Option<AngleValue>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    trials: Option<u64>,
    partitions: Option<usize>,
    min_per_partition: Option<u64>,
    seed: Option<u64>,
    marginal_mode: Option<String>,
    include_empty_windows: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    r: Vec<AngleValue>,
    eta: Vec<f64>,
    angles: Option<String>,
    trials_per_cell: Option<u64>,
    partitions: Option<usize>,
    min_per_partition: Option<u64>,
}

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SCAN_TRIALS: u64 = 100_000;
pub const DEFAULT_SCAN_PARTITIONS: usize = 4;

/// A validated configuration with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// The `kind` (or catalog name) the source was built from.
    pub source_name: String,
    pub source: SourceModel,
    pub detector: DetectorConfig,
    pub noise_rate: f64,
    pub leakage: Leakage,
    pub angles: AngleSet,
    pub trials: u64,
    pub partitions: usize,
    pub min_per_partition: u64,
    pub seed: u64,
    pub marginal_mode: MarginalMode,
    pub include_empty_windows: bool,
    pub scan: Option<ScanConfig>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub states: Vec<QuantumState>,
    pub etas: Vec<f64>,
    pub angles: ScanAngles,
    pub trials_per_cell: u64,
    pub partitions: usize,
    pub min_per_partition: u64,
}

impl ExperimentConfig {
    /// Defaults for everything but the source.
    pub fn with_source(source_name: impl Into<String>, source: SourceModel) -> Self {
        Self {
            source_name: source_name.into(),
            source,
            detector: DetectorConfig::ideal(),
            noise_rate: 0.0,
            leakage: Leakage::none(),
            angles: AngleSet::ch_optimal(),
            trials: DEFAULT_TRIALS,
            partitions: DEFAULT_PARTITIONS,
            min_per_partition: DEFAULT_MIN_PER_PARTITION,
            seed: 0,
            marginal_mode: MarginalMode::Pooled,
            include_empty_windows: true,
            scan: None,
        }
    }

    pub fn experiment(&self) -> Experiment {
        Experiment {
            source: self.source.clone(),
            detector: self.detector,
            leakage: self.leakage,
            angles: self.angles,
            noise_rate: self.noise_rate,
            include_empty_windows: self.include_empty_windows,
            seed: self.seed,
        }
    }

    pub fn scan_spec(&self) -> Option<ScanSpec> {
        self.scan.as_ref().map(|s| ScanSpec {
            states: s.states.clone(),
            etas: s.etas.clone(),
            angles: s.angles,
            trials_per_cell: s.trials_per_cell,
            partitions: s.partitions,
            min_per_partition: s.min_per_partition,
            mode: self.marginal_mode,
            seed: self.seed,
        })
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        ConfigError::Parse { message, .. } => ConfigError::Parse {
            path: path.to_owned(),
            message,
        },
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: PathBuf::from("<string>"),
        message: e.to_string(),
    })?;
    validate(raw)
}

fn probability(field: &str, v: Option<f64>, default: f64) -> Result<f64, ConfigError> {
    let v = v.unwrap_or(default);
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be in [0, 1], got {v}")))
    }
}

/// Rejects keys that exist in the schema but mean nothing for this kind.
fn unused(field: &str, kind: &str, present: bool) -> Result<(), ConfigError> {
    if present {
        Err(invalid(field, format!("does not apply to kind `{kind}`")))
    } else {
        Ok(())
    }
}

struct LocalParams<'a> {
    prefix: &'a str,
    kind: &'a str,
    exponent: Option<f64>,
    pair_rate: Option<f64>,
    alice_only: Option<f64>,
    bob_only: Option<f64>,
}

impl LocalParams<'_> {
    fn field(&self, name: &str) -> String {
        format!("{}.{name}", self.prefix)
    }

    /// `None` when `kind` is not a local model.
    fn build(&self) -> Result<Option<LocalModel>, ConfigError> {
        let coin = self.pair_rate.is_some() || self.alice_only.is_some() || self.bob_only.is_some();
        Ok(Some(match self.kind {
            "cosine-sign" => {
                unused(&self.field("exponent"), self.kind, self.exponent.is_some())?;
                unused(&self.field("pair_rate"), self.kind, coin)?;
                LocalModel::CosineSign(CosineSign)
            }
            "detection-biased" => {
                unused(&self.field("pair_rate"), self.kind, coin)?;
                let e = self.exponent.unwrap_or(1.0);
                LocalModel::DetectionBiased(
                    DetectionBiased::new(e).map_err(|err| invalid(self.field("exponent"), err))?,
                )
            }
            "shared-coin" => {
                unused(&self.field("exponent"), self.kind, self.exponent.is_some())?;
                let p = probability(&self.field("pair_rate"), self.pair_rate, 0.5)?;
                let a = probability(&self.field("alice_only"), self.alice_only, 0.0)?;
                let b = probability(&self.field("bob_only"), self.bob_only, 0.0)?;
                LocalModel::SharedCoin(SharedCoin::new(p, a, b).map_err(|err| invalid(self.field("pair_rate"), err))?)
            }
            _ => return Ok(None),
        }))
    }
}

const SOURCE_KINDS: &str = "quantum, cosine-sign, detection-biased, shared-coin, mixture, catalog";

fn build_source(s: &RawSource) -> Result<(String, SourceModel, Option<AngleSet>), ConfigError> {
    let kind = s.kind.as_str();
    if kind != "catalog" {
        unused("source.name", kind, s.name.is_some())?;
    }
    if kind != "mixture" {
        unused("source.components", kind, s.components.is_some())?;
    }
    if kind != "quantum" {
        unused("source.r", kind, s.r.is_some())?;
    }
    let local = LocalParams {
        prefix: "source",
        kind,
        exponent: s.exponent,
        pair_rate: s.pair_rate,
        alice_only: s.alice_only,
        bob_only: s.bob_only,
    };
    if let Some(m) = local.build()? {
        return Ok((kind.to_owned(), SourceModel::Local(m), None));
    }
    let any_local_key = s.exponent.is_some() || s.pair_rate.is_some() || s.alice_only.is_some() || s.bob_only.is_some();
    match kind {
        "quantum" => {
            unused("source.exponent", kind, any_local_key)?;
            let r = match &s.r {
                Some(v) => v.radians("source.r")?,
                None => FRAC_PI_4,
            };
            let state = QuantumState::new(r).map_err(|e| invalid("source.r", e))?;
            Ok((kind.to_owned(), SourceModel::Quantum(state), None))
        }
        "mixture" => {
            unused("source.exponent", kind, any_local_key)?;
            let comps = s.components.as_deref().unwrap_or_default();
            if comps.is_empty() {
                return Err(invalid("source.components", "a mixture needs at least one component"));
            }
            let mut out = Vec::with_capacity(comps.len());
            for (i, c) in comps.iter().enumerate() {
                let prefix = format!("source.components[{i}]");
                let params = LocalParams {
                    prefix: &prefix,
                    kind: &c.kind,
                    exponent: c.exponent,
                    pair_rate: c.pair_rate,
                    alice_only: c.alice_only,
                    bob_only: c.bob_only,
                };
                let model = params.build()?.ok_or_else(|| {
                    invalid(
                        format!("{prefix}.kind"),
                        format!(
                            "`{}` is not a local model (cosine-sign, detection-biased, shared-coin)",
                            c.kind
                        ),
                    )
                })?;
                if c.block_length == 0 {
                    return Err(invalid(format!("{prefix}.block_length"), "must be positive"));
                }
                out.push(MixtureComponent {
                    model,
                    block_length: c.block_length,
                });
            }
            let mix = TemporalMixture::new(out).map_err(|e| invalid("source.components", e))?;
            Ok((kind.to_owned(), SourceModel::Mixture(mix), None))
        }
        "catalog" => {
            unused("source.exponent", kind, any_local_key)?;
            let name = s
                .name
                .as_deref()
                .ok_or_else(|| invalid("source.name", "required for kind `catalog`"))?;
            let entry = lookup(name).map_err(|e| invalid("source.name", e))?;
            Ok((entry.name.to_owned(), entry.model, Some(entry.angles)))
        }
        other => Err(invalid(
            "source.kind",
            format!("unknown kind `{other}` (expected one of {SOURCE_KINDS})"),
        )),
    }
}

fn build_angles(raw: &RawAngles) -> Result<AngleSet, ConfigError> {
    let get = |name: &str, v: &Option<AngleValue>| {
        let field = format!("angles.{name}");
        match v {
            Some(a) => a.radians(&field),
            None => Err(invalid(
                field,
                "missing; the angle set needs all of alpha, alpha_prime, beta, beta_prime",
            )),
        }
    };
    Ok(AngleSet::new(
        get("alpha", &raw.alpha)?,
        get("alpha_prime", &raw.alpha_prime)?,
        get("beta", &raw.beta)?,
        get("beta_prime", &raw.beta_prime)?,
    ))
}

fn fixed<const N: usize>(field: &str, v: &[f64]) -> Result<[f64; N], ConfigError> {
    v.try_into()
        .map_err(|_| invalid(field, format!("expected {N} values, got {}", v.len())))
}

fn build_leakage(l: &RawLeakage) -> Result<Leakage, ConfigError> {
    let mode = match l.mode.as_deref().unwrap_or("none") {
        "none" => LeakageMode::None,
        "outcome-only" => LeakageMode::OutcomeOnly,
        "setting-only" => LeakageMode::SettingOnly,
        "both" => LeakageMode::Both,
        other => {
            return Err(invalid(
                "leakage.mode",
                format!("unknown mode `{other}` (expected none, outcome-only, setting-only, both)"),
            ))
        }
    };
    if mode == LeakageMode::None {
        let extra = l.strategy.is_some()
            || l.bias.is_some()
            || l.target.is_some()
            || l.target_r.is_some()
            || l.target_joint.is_some()
            || l.target_alice.is_some()
            || l.target_bob.is_some();
        unused("leakage.strategy", "none", extra)?;
        return Ok(Leakage::none());
    }
    let forgery = match l.strategy.as_deref() {
        None => Forgery::matching(mode).expect("leaking mode has a matching strategy"),
        Some("exact-conditional") => Forgery::ExactConditional,
        Some("outcome-conditional") => Forgery::OutcomeConditional,
        Some("setting-conditional") => Forgery::SettingConditional { bias: 0.1 },
        Some(other) => {
            return Err(invalid(
                "leakage.strategy",
                format!(
                    "unknown strategy `{other}` (expected exact-conditional, outcome-conditional, setting-conditional)"
                ),
            ))
        }
    };
    let forgery = match (forgery, l.bias) {
        (Forgery::SettingConditional { .. }, Some(bias)) => Forgery::SettingConditional { bias },
        (_, Some(_)) => {
            return Err(invalid(
                "leakage.bias",
                "only applies to strategy `setting-conditional`",
            ))
        }
        (f, None) => f,
    };
    let target = match l.target.as_deref().unwrap_or("quantum") {
        "quantum" => {
            let table_keys = l.target_joint.is_some() || l.target_alice.is_some() || l.target_bob.is_some();
            unused("leakage.target_joint", "quantum", table_keys)?;
            let r = match &l.target_r {
                Some(v) => v.radians("leakage.target_r")?,
                None => FRAC_PI_4,
            };
            ForgeTarget::Quantum(QuantumState::new(r).map_err(|e| invalid("leakage.target_r", e))?)
        }
        "table" => {
            unused("leakage.target_r", "table", l.target_r.is_some())?;
            let need = |field: &str, v: &Option<Vec<f64>>| {
                v.clone().ok_or_else(|| invalid(field, "required for target `table`"))
            };
            let joint = fixed::<4>("leakage.target_joint", &need("leakage.target_joint", &l.target_joint)?)?;
            let alice = fixed::<2>("leakage.target_alice", &need("leakage.target_alice", &l.target_alice)?)?;
            let bob = fixed::<2>("leakage.target_bob", &need("leakage.target_bob", &l.target_bob)?)?;
            ForgeTarget::Table(
                ProbabilityTable::exact(joint, alice, bob).map_err(|e| invalid("leakage.target_joint", e))?,
            )
        }
        other => {
            return Err(invalid(
                "leakage.target",
                format!("unknown target `{other}` (expected quantum, table)"),
            ))
        }
    };
    let strategy = ForgingStrategy::new(forgery, target).map_err(|e| invalid("leakage.bias", e))?;
    Leakage::new(mode, Some(strategy)).map_err(|e| invalid("leakage.strategy", e))
}

fn build_scan(s: &RawScan, angles: AngleSet) -> Result<ScanConfig, ConfigError> {
    if s.r.is_empty() {
        return Err(invalid("scan.r", "grid must be nonempty"));
    }
    if s.eta.is_empty() {
        return Err(invalid("scan.eta", "grid must be nonempty"));
    }
    let mut states = Vec::with_capacity(s.r.len());
    for (i, r) in s.r.iter().enumerate() {
        let field = format!("scan.r[{i}]");
        let v = r.radians(&field)?;
        states.push(QuantumState::new(v).map_err(|e| invalid(field, e))?);
    }
    for (i, &e) in s.eta.iter().enumerate() {
        probability(&format!("scan.eta[{i}]"), Some(e), 0.0)?;
    }
    let scan_angles = match s.angles.as_deref().unwrap_or("optimized") {
        "optimized" => ScanAngles::Optimized,
        "fixed" => ScanAngles::Fixed(angles),
        other => {
            return Err(invalid(
                "scan.angles",
                format!("unknown value `{other}` (expected optimized, fixed)"),
            ))
        }
    };
    let partitions = s.partitions.unwrap_or(DEFAULT_SCAN_PARTITIONS);
    if partitions == 0 {
        return Err(invalid("scan.partitions", "must be positive"));
    }
    let trials_per_cell = s.trials_per_cell.unwrap_or(DEFAULT_SCAN_TRIALS);
    if trials_per_cell == 0 {
        return Err(invalid("scan.trials_per_cell", "must be positive"));
    }
    Ok(ScanConfig {
        states,
        etas: s.eta.clone(),
        angles: scan_angles,
        trials_per_cell,
        partitions,
        min_per_partition: s.min_per_partition.unwrap_or(DEFAULT_MIN_PER_PARTITION),
    })
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let (source_name, source, catalog_angles) = build_source(&raw.source)?;
    let d = &raw.detector;
    let detector = DetectorConfig::new(
        probability("detector.eta_alice", d.eta_alice, 1.0)?,
        probability("detector.eta_bob", d.eta_bob, 1.0)?,
        probability("detector.empty_window_rate", d.empty_window_rate, 0.0)?,
    )
    .map_err(|e| invalid("detector", e))?;
    let noise_rate = probability("detector.noise_rate", d.noise_rate, 0.0)?;
    let leakage = build_leakage(&raw.leakage)?;
    let angles = match &raw.angles {
        Some(a) => build_angles(a)?,
        None => catalog_angles.unwrap_or_default(),
    };
    let r = &raw.run;
    let trials = r.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(invalid("run.trials", "must be positive"));
    }
    let partitions = r.partitions.unwrap_or(DEFAULT_PARTITIONS);
    if partitions == 0 {
        return Err(invalid("run.partitions", "must be positive"));
    }
    let marginal_mode = match &r.marginal_mode {
        Some(m) => m.parse().map_err(|e| invalid("run.marginal_mode", e))?,
        None => MarginalMode::Pooled,
    };
    let scan = raw.scan.as_ref().map(|s| build_scan(s, angles)).transpose()?;
    Ok(ExperimentConfig {
        source_name,
        source,
        detector,
        noise_rate,
        leakage,
        angles,
        trials,
        partitions,
        min_per_partition: r.min_per_partition.unwrap_or(DEFAULT_MIN_PER_PARTITION),
        seed: r.seed.unwrap_or(0),
        marginal_mode,
        include_empty_windows: r.include_empty_windows.unwrap_or(true),
        scan,
    })
}
