//! The `lrfbench` command-line harness: repeatability benchmarks, parameter
//! sweeps, synthetic pair generation and axis timing.

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrf_core::eval::{EvalError, SweepKind};
use lrf_core::io::IoError;
use lrf_core::lrf::{Dataset, SpecError};
use lrf_core::nuisance::{NuisanceError, NuisanceKind};
use thiserror::Error;

use crate::config::{FileConfig, Overrides, RunConfig, OUT_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}", path = path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Data(#[from] IoError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Nuisance(#[from] NuisanceError),
}

impl CliError {
    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lrfbench", version, about = "Repeatability benchmarks for local reference frame axes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repeatability of each method on clean pairs and under nuisance schedules.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Nuisance kinds to sweep with their default schedules, comma-separated.
        #[arg(long, value_delimiter = ',')]
        robustness: Option<Vec<NuisanceKind>>,
    },
    /// Radius, weight, disambiguation and z-dependency matrices.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep kinds to run, comma-separated.
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<SweepKind>>,
    },
    /// Writes a synthetic pair as PLY files, a pose file and a manifest.
    Synth {
        /// Synthetic spec (TOML).
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// File name stem and manifest name.
        #[arg(long, default_value = "synthetic")]
        name: String,
    },
    /// Median axis construction time per method and radius.
    Timing {
        #[command(flatten)]
        common: CommonArgs,
        /// Keypoints timed per method and radius.
        #[arg(long)]
        timing_keypoints: Option<usize>,
        #[arg(long)]
        min_evaluations: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration (TOML); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset manifest (TOML).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Synthetic spec (TOML).
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    /// Number of synthetic pairs.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// `paper14`, `all`, or a comma-separated list of method names.
    #[arg(long)]
    pub methods: Option<String>,
    /// Parameter presets (B3R, U3M, U3OR, QuLD, K3R, S3R).
    #[arg(long)]
    pub dataset: Option<Dataset>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to $LRFBENCH_OUT, then `lrfbench-out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Minimum overlap ratio of manifest pairs [default: 0.1].
    #[arg(long)]
    pub overlap_min: Option<f64>,
    /// Angle threshold of a repeatable axis, in degrees [default: 5].
    #[arg(long)]
    pub threshold_deg: Option<f64>,
    /// Keypoints per pair [default: 1000].
    #[arg(long)]
    pub keypoints: Option<usize>,
    /// Support radii in mr, comma-separated [default: 5,10,15,20,25,30].
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            manifest: self.manifest.clone(),
            synthetic: self.synthetic.clone(),
            pairs: self.pairs,
            methods: self.methods.clone(),
            dataset: self.dataset,
            seed: self.seed,
            out: self.out.clone(),
            workers: self.workers,
            overlap_min: self.overlap_min,
            threshold_deg: self.threshold_deg,
            keypoints: self.keypoints,
            radii: self.radii.clone(),
            ..Default::default()
        }
    }

    fn resolve(&self, extra: Overrides) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let base = self.overrides();
        let cli = Overrides {
            sweeps: extra.sweeps,
            robustness: extra.robustness,
            timing_keypoints: extra.timing_keypoints,
            min_evaluations: extra.min_evaluations,
            ..base
        };
        RunConfig::resolve(file, cli, std::env::var_os(OUT_ENV).map(PathBuf::from))
    }
}

/// How a command finished when it did not fail outright.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Per-pair or per-method failures that were skipped.
    pub data_errors: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// Runs a parsed command: exit 0 on success, 1 on configuration or I/O
/// errors, 2 when some pairs or methods failed (listed in `errors.log`).
pub fn run(cli: Cli) -> ExitCode {
    match dispatch(cli.command) {
        Ok(o) if o.data_errors.is_empty() => ExitCode::SUCCESS,
        Ok(o) => {
            eprintln!("lrfbench: {} item(s) failed; see errors.log", o.data_errors.len());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("lrfbench: {}", e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Bench { common, robustness } => {
            let cfg = common.resolve(Overrides {
                robustness,
                ..Default::default()
            })?;
            commands::with_workers(&cfg, || commands::bench(&cfg))
        }
        Command::Sweep { common, kinds } => {
            let cfg = common.resolve(Overrides {
                sweeps: kinds,
                ..Default::default()
            })?;
            commands::with_workers(&cfg, || commands::sweep(&cfg))
        }
        Command::Timing {
            common,
            timing_keypoints,
            min_evaluations,
        } => {
            let cfg = common.resolve(Overrides {
                timing_keypoints,
                min_evaluations,
                ..Default::default()
            })?;
            commands::timing(&cfg)
        }
        Command::Synth { spec, out, seed, name } => {
            let out = out
                .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
                .unwrap_or_else(|| config::DEFAULT_OUT.into());
            commands::synth(&spec, &out, seed, &name)
        }
    }
}
