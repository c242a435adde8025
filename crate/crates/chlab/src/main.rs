use std::path::PathBuf;
use std::process::ExitCode;

use chlab::commands::{self, AnalysisParams};
use chlab::config::{load_config, ExperimentConfig};
use chlab::parallel::{Pool, THREADS_ENV};
use chlab::trials::{read_trials, TrialFormat};
use chlab::{Error, Result};
use chlab_core::analysis::{MarginalMode, DEFAULT_MIN_PER_PARTITION, DEFAULT_PARTITIONS};
use clap::{Args, Parser, Subcommand};

/// Monte Carlo simulator and analyzer for Clauser-Horne Bell tests.
#[derive(Parser)]
#[command(name = "chlab", version)]
struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOverrides {
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides the partition count.
    #[arg(long)]
    partitions: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file; print a summary and, with --out,
    /// write trials, the CH report and the partition report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        run: RunOverrides,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trial file format.
        #[arg(long, default_value = "csv")]
        format: TrialFormat,
    },
    /// Recompute the reports from a trial file.
    Analyze {
        trials: PathBuf,
        /// Take partitions, minimum partition size and marginal mode from here.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        partitions: Option<usize>,
        #[arg(long)]
        min_per_partition: Option<u64>,
        /// pooled or per-pair.
        #[arg(long)]
        marginal_mode: Option<MarginalMode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Efficiency scan over the config's [scan] grid.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Trials per cell.
        #[arg(long)]
        trials: Option<u64>,
        /// Partitions per cell.
        #[arg(long)]
        partitions: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a demonstration: `signaling` or `detection-loophole`.
    Demo {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trials for the detection-loophole demo.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Sequence length for the signaling demo.
        #[arg(long, default_value_t = 16)]
        length: usize,
    },
    /// Random-input check of the six-term CH tautology and of m + n ≥ m.
    Fuzz {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn apply_overrides(cfg: &mut ExperimentConfig, o: &RunOverrides) -> Result<()> {
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(t) = o.trials {
        if t == 0 {
            return Err(Error::Usage("--trials must be positive".into()));
        }
        cfg.trials = t;
    }
    if let Some(k) = o.partitions {
        if k == 0 {
            return Err(Error::Usage("--partitions must be positive".into()));
        }
        cfg.partitions = k;
    }
    Ok(())
}

fn pool(threads: usize) -> Result<Pool> {
    Pool::new(threads).map_err(|e| Error::Usage(format!("cannot start {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    let pool = pool(cli.threads)?;
    match cli.command {
        Command::Simulate {
            config,
            run,
            out,
            format,
        } => {
            let mut cfg = load_config(&config)?;
            apply_overrides(&mut cfg, &run)?;
            let sim = commands::simulate(&cfg, &pool)?;
            println!(
                "{}: {} trials ({} empty windows), seed {}, {} marginals",
                cfg.source_name, sim.run.trials, sim.run.empty_windows, cfg.seed, cfg.marginal_mode
            );
            print!("{}", commands::analysis_summary(&sim.analysis));
            if let Some(dir) = out {
                let trials = commands::write_simulation(&dir, &sim, format)?;
                println!("wrote {} and reports in {}", trials.display(), dir.display());
            }
        }
        Command::Analyze {
            trials,
            config,
            partitions,
            min_per_partition,
            marginal_mode,
            out,
        } => {
            let mut params = match config {
                Some(p) => AnalysisParams::from_config(&load_config(&p)?),
                None => AnalysisParams {
                    partitions: DEFAULT_PARTITIONS,
                    min_per_partition: DEFAULT_MIN_PER_PARTITION,
                    mode: MarginalMode::Pooled,
                },
            };
            if let Some(k) = partitions {
                params.partitions = k;
            }
            if let Some(m) = min_per_partition {
                params.min_per_partition = m;
            }
            if let Some(m) = marginal_mode {
                params.mode = m;
            }
            let records = read_trials(&trials)?;
            let a = commands::analyze(&records, params, &pool)?;
            println!(
                "{}: {} records, {} marginals",
                trials.display(),
                records.len(),
                params.mode
            );
            print!("{}", commands::analysis_summary(&a));
            if let Some(dir) = out {
                commands::write_analysis(&dir, &a)?;
                println!("wrote reports in {}", dir.display());
            }
        }
        Command::Scan {
            config,
            seed,
            trials,
            partitions,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(scan) = cfg.scan.as_mut() {
                if let Some(t) = trials {
                    scan.trials_per_cell = t;
                }
                if let Some(k) = partitions {
                    scan.partitions = k;
                }
            }
            let table = commands::scan(&cfg, &pool)?;
            print!("{}", commands::scan_summary(&table));
            if let Some(dir) = out {
                let p = commands::write_scan_file(&dir, &table)?;
                println!("wrote {}", p.display());
            }
        }
        Command::Demo {
            name,
            seed,
            trials,
            length,
        } => match name.as_str() {
            "signaling" => {
                for d in commands::demo_signaling(length)? {
                    println!(
                        "C = {}: {}  marginal P(1) = {}  decoded C = {}",
                        u8::from(d.control),
                        d.pattern(),
                        d.marginal_one,
                        u8::from(d.decoded)
                    );
                }
                println!("both sequences have the same single-bit marginal, yet the decoder recovers C every time");
            }
            "detection-loophole" => {
                let d = commands::demo_detection_loophole(trials, seed, &pool)?;
                println!("detection-biased local source, {} trials", d.trials);
                println!("fair-sampled CHSH S = {:.4} (local bound 2)", d.chsh);
                for i in 0..4 {
                    println!(
                        "CH variant {i}: {:+.6} ± {:.6}  {}",
                        d.ch.value(i),
                        d.std_errors[i],
                        if d.ch.violated()[i] { "violated" } else { "not violated" }
                    );
                }
            }
            other => {
                return Err(Error::Usage(format!(
                    "unknown demo `{other}` (expected signaling or detection-loophole)"
                )))
            }
        },
        Command::Fuzz { samples, seed } => {
            let r = commands::fuzz(samples, seed)?;
            println!(
                "{} samples: max tautology LHS {:e}, {} tautology violations, {} m+n<m violations",
                r.samples, r.max_lhs, r.tautology_violations, r.sum_violations
            );
            if !r.passed() {
                return Err(Error::Core(chlab_core::Error::Invalid("fuzz found violations".into())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
