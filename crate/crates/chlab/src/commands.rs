//! What each subcommand computes, separated from argument parsing and
//! printing so tests can call it directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chlab_core::analysis::{
    accumulate_counts, ch_standard_errors, efficiency_scan, estimate_probabilities, partition_and_score_with,
    CountsTable, MarginalMode, PartitionReport, Runner, ScanTable, TrialRecord,
};
use chlab_core::channel::{signaling_pattern_demo, SignalingDemo};
use chlab_core::experiment::{Experiment, Run};
use chlab_core::fuzz::{tautology_fuzz, FuzzReport};
use chlab_core::inequality::{ch_values, chsh_fair_sampled, ChReport};
use chlab_core::sources::lookup;

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{write_ch_report, write_partition_report, write_scan};
use crate::trials::{write_trials, TrialFormat};
use crate::{Error, Result};

pub const TRIALS_STEM: &str = "trials";
pub const CH_REPORT_FILE: &str = "ch_report.csv";
pub const PARTITION_REPORT_FILE: &str = "partition_report.csv";
pub const SCAN_FILE: &str = "scan.csv";

/// Parameters of the analysis applied to a record stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisParams {
    pub partitions: usize,
    pub min_per_partition: u64,
    pub mode: MarginalMode,
}

impl AnalysisParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            partitions: cfg.partitions,
            min_per_partition: cfg.min_per_partition,
            mode: cfg.marginal_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub params: AnalysisParams,
    pub counts: CountsTable,
    pub ch: ChReport,
    pub std_errors: [f64; 4],
    pub partitions: PartitionReport,
}

/// Counts, whole-stream CH values and the partitioned 50% rule.
pub fn analyze<R: Runner>(records: &[TrialRecord], params: AnalysisParams, runner: &R) -> Result<Analysis> {
    let counts = accumulate_counts(records);
    let table = estimate_probabilities(&counts, params.mode)?;
    let partitions = partition_and_score_with(
        runner,
        records,
        params.partitions,
        params.min_per_partition,
        params.mode,
    )?;
    Ok(Analysis {
        params,
        ch: ch_values(&table),
        std_errors: ch_standard_errors(&counts, params.mode)?,
        counts,
        partitions,
    })
}

pub struct Simulation {
    pub run: Run,
    pub analysis: Analysis,
}

pub fn simulate<R: Runner>(cfg: &ExperimentConfig, runner: &R) -> Result<Simulation> {
    let run = cfg.experiment().run(cfg.trials, runner)?;
    let analysis = analyze(&run.records, AnalysisParams::from_config(cfg), runner)?;
    Ok(Simulation { run, analysis })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `ch_report.csv` and `partition_report.csv` into `dir`.
pub fn write_analysis(dir: &Path, a: &Analysis) -> Result<()> {
    create_dir(dir)?;
    let ch = dir.join(CH_REPORT_FILE);
    write_ch_report(&ch, &a.ch).map_err(|e| Error::io(&ch, e))?;
    let part = dir.join(PARTITION_REPORT_FILE);
    write_partition_report(&part, &a.partitions).map_err(|e| Error::io(&part, e))?;
    Ok(())
}

/// Writes the trial file and both reports; returns the trial file path.
pub fn write_simulation(dir: &Path, sim: &Simulation, format: TrialFormat) -> Result<PathBuf> {
    create_dir(dir)?;
    let trials = dir.join(format!("{TRIALS_STEM}.{}", format.extension()));
    write_trials(&sim.run.records, &trials, format)?;
    write_analysis(dir, &sim.analysis)?;
    Ok(trials)
}

/// One line per variant with its 50%-rule fraction, then the any-variant line.
pub fn analysis_summary(a: &Analysis) -> String {
    let (lo, hi) = a.partitions.band();
    let mut s = String::new();
    for i in 0..4 {
        let _ = writeln!(
            s,
            "variant {i}: value {:+.6} ± {:.6}  {}  fraction {:.2} of {} partitions (3σ band {lo:.2}..{hi:.2})",
            a.ch.value(i),
            a.std_errors[i],
            if a.ch.violated()[i] {
                "violated    "
            } else {
                "not violated"
            },
            a.partitions.fractions[i],
            a.partitions.k,
        );
    }
    let _ = writeln!(
        s,
        "any variant: fraction {:.2} (four variants tested, so the chance baseline exceeds one half)",
        a.partitions.any_fraction
    );
    s
}

pub fn scan<R: Runner>(cfg: &ExperimentConfig, runner: &R) -> Result<ScanTable> {
    let spec = cfg.scan_spec().ok_or_else(|| {
        Error::Config(ConfigError::Invalid {
            field: "scan".into(),
            message: "the scan command needs a [scan] section".into(),
        })
    })?;
    Ok(efficiency_scan(&spec, runner)?)
}

pub fn write_scan_file(dir: &Path, table: &ScanTable) -> Result<PathBuf> {
    create_dir(dir)?;
    let path = dir.join(SCAN_FILE);
    write_scan(&path, table).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Grid of the best variant value per cell, `*` marking persistent cells.
pub fn scan_summary(t: &ScanTable) -> String {
    let mut s = String::from("r \\ eta ");
    for e in 0..t.n_etas {
        let _ = write!(s, "{:>10.3}", t.cell(0, e).eta);
    }
    s.push('\n');
    for r in 0..t.n_states {
        let _ = write!(s, "{:<8.4}", t.cell(r, 0).r);
        for e in 0..t.n_etas {
            let c = t.cell(r, e);
            let best = c.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let _ = write!(s, "{:>9.4}{}", best, if c.persistent() { '*' } else { ' ' });
        }
        s.push('\n');
    }
    s.push_str("values: largest CH variant per cell; * = persistent violation\n");
    s
}

/// Signaling demo for both control values.
pub fn demo_signaling(length: usize) -> Result<[SignalingDemo; 2]> {
    Ok([
        signaling_pattern_demo(false, length)?,
        signaling_pattern_demo(true, length)?,
    ])
}

pub struct LoopholeDemo {
    pub chsh: f64,
    pub ch: ChReport,
    pub std_errors: [f64; 4],
    pub trials: u64,
}

/// Detection-biased local source: fair-sampled CHSH against the CH
/// variants, both on the same records.
pub fn demo_detection_loophole<R: Runner>(trials: u64, seed: u64, runner: &R) -> Result<LoopholeDemo> {
    let entry = lookup("detection-biased")?;
    let mut e = Experiment::new(entry.model);
    e.angles = entry.angles;
    e.seed = seed;
    let run = e.run(trials, runner)?;
    let counts = accumulate_counts(&run.records);
    Ok(LoopholeDemo {
        chsh: chsh_fair_sampled(&run.coincidences.pairs)?,
        ch: ch_values(&estimate_probabilities(&counts, MarginalMode::Pooled)?),
        std_errors: ch_standard_errors(&counts, MarginalMode::Pooled)?,
        trials,
    })
}

pub fn fuzz(samples: u64, seed: u64) -> Result<FuzzReport> {
    Ok(tautology_fuzz(samples, seed)?)
}
