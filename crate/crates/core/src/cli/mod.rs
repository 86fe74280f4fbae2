//! Command-line front end: `prepare`, `featurize`, `train`, `eval`,
//! `predict` and `report`.
//!
//! Settings resolve as defaults, then the `--config` TOML file, then flags.
//! Exit status is 0 on success, 2 for invalid input or malformed files and
//! 3 for I/O failures.

mod commands;
mod config;
mod log;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::Result;

pub use commands::{align_rows, exclusion_path, read_exclusions, Exclusion};
pub use config::RunConfig;
pub use log::EventLog;

#[derive(Debug, Parser)]
#[command(
    name = "speechcmd",
    version,
    about = "Speech-command recognition toolkit"
)]
pub struct Cli {
    /// Seed for every random stage.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with run settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Emit JSON events on stderr instead of text lines.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a dataset tree and write a split, augmented manifest.
    Prepare(PrepareArgs),
    /// Compute one log-mel patch per manifest record.
    Featurize(FeaturizeArgs),
    /// Train the classifier head.
    Train(TrainArgs),
    /// Evaluate a checkpoint on the validation split.
    Eval(EvalArgs),
    /// Classify a single clip or embedding row.
    Predict(PredictArgs),
    /// Re-render report files from a confusion matrix and history.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Dataset root with one directory per word.
    pub root: PathBuf,
    /// Manifest to write.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub snr_min_db: Option<f64>,
    #[arg(long)]
    pub snr_max_db: Option<f64>,
    /// Skip noise-mixed copies of training clips.
    #[arg(long)]
    pub no_augment: bool,
    /// Keep every `unknown` clip.
    #[arg(long)]
    pub no_cap_unknown: bool,
    /// Do not synthesize extra background segments.
    #[arg(long)]
    pub no_top_up_background: bool,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    pub manifest: PathBuf,
    /// Dataset root the manifest paths are relative to.
    #[arg(long)]
    pub root: PathBuf,
    /// FPZ1 file to write.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub n_bands: Option<usize>,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct FeatureSource {
    /// FPZ1 patches; each patch is flattened into one row.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// EMB1 embeddings, one row per manifest record.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: FeatureSource,
    #[arg(long)]
    pub manifest: PathBuf,
    /// HDP1 checkpoint to write.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Per-epoch history CSV.
    #[arg(long)]
    pub history: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Hidden layer widths, comma separated; empty for a linear head.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub hidden: Option<Vec<usize>>,
    /// Also write `<out>.epochNNN` after every epoch.
    #[arg(long)]
    pub checkpoint_every_epoch: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub source: FeatureSource,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// History CSV; adds `curves.svg` to the report.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// WAV clip, for checkpoints trained on log-mel patches.
    pub audio: Option<PathBuf>,
    /// EMB1 file, for checkpoints trained on embeddings.
    #[arg(long, requires = "row")]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub row: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub confusion: PathBuf,
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Prepare(_) => "prepare",
            Command::Featurize(_) => "featurize",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Predict(_) => "predict",
            Command::Report(_) => "report",
        }
    }

    fn apply(&self, cfg: &mut RunConfig) {
        match self {
            Command::Prepare(a) => {
                let p = &mut cfg.prepare;
                p.train_fraction = a.train_fraction.unwrap_or(p.train_fraction);
                p.snr_min_db = a.snr_min_db.unwrap_or(p.snr_min_db);
                p.snr_max_db = a.snr_max_db.unwrap_or(p.snr_max_db);
                p.augment &= !a.no_augment;
                p.cap_unknown &= !a.no_cap_unknown;
                p.top_up_background &= !a.no_top_up_background;
            }
            Command::Featurize(a) => {
                cfg.frontend.n_bands = a.n_bands.unwrap_or(cfg.frontend.n_bands);
            }
            Command::Train(a) => {
                let t = &mut cfg.train;
                t.epochs = a.epochs.unwrap_or(t.epochs);
                t.batch_size = a.batch_size.unwrap_or(t.batch_size);
                t.learning_rate = a.lr.unwrap_or(t.learning_rate);
                if let Some(h) = &a.hidden {
                    cfg.hidden_dims = h.clone();
                }
            }
            Command::Eval(_) | Command::Predict(_) | Command::Report(_) => {}
        }
    }
}

impl Cli {
    /// Fully resolved settings for this invocation.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        self.command.apply(&mut cfg);
        Ok(cfg.resolve())
    }
}

/// Resolve settings, echo them, and run the subcommand.
pub fn execute(cli: &Cli, log: &EventLog) -> Result<()> {
    let cfg = cli.resolve()?;
    log.emit(
        "config",
        json!({ "command": cli.command.name(), "config": cfg }),
    );
    match &cli.command {
        Command::Prepare(a) => commands::prepare(a, &cfg, log),
        Command::Featurize(a) => commands::featurize(a, &cfg, log),
        Command::Train(a) => commands::train(a, &cfg, log),
        Command::Eval(a) => commands::eval(a, log),
        Command::Predict(a) => commands::predict(a, &cfg, log),
        Command::Report(a) => commands::report(a, log),
    }
}

/// Parse `args` (program name first) and run; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let log = EventLog { json: cli.json };
    match execute(&cli, &log) {
        Ok(()) => 0,
        Err(e) => {
            log.emit(
                "error",
                json!({ "message": e.to_string(), "exit_code": e.exit_code() }),
            );
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
