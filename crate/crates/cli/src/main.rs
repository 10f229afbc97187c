//! `baybayin` command-line tool.
//!
//! Exit codes: 0 success, 1 operational failure, 2 usage or configuration
//! error.

mod args;
mod commands;
mod config;
mod render;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::args::{
    AugmentArgs, BenchArgs, EvalArgs, ExportArgs, PredictArgs, PreprocessArgs, RenderArgs,
    SplitArgs,
};
use crate::config::CliConfig;

/// Marks an error as a usage or configuration problem (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "baybayin", version, about = "Baybayin character-instance detection toolkit")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for batch commands (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the preprocessing pipeline over images.
    Preprocess(PreprocessArgs),
    /// Write augmented copies of a labelled dataset.
    Augment(AugmentArgs),
    /// Partition a flat dataset into train/val/test.
    Split(SplitArgs),
    /// Detect, order and transliterate characters.
    Predict(PredictArgs),
    /// Score prediction sidecars against label files.
    Eval(EvalArgs),
    /// Measure per-image latency and throughput.
    Bench(BenchArgs),
    /// Draw detections over an image.
    Render(RenderArgs),
    /// Write training configuration and class weights for an external trainer.
    ExportTrain(ExportArgs),
}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<UsageError>()
            || matches!(
                e.downcast_ref::<baybayin_core::Error>(),
                Some(baybayin_core::Error::InvalidConfig(_))
            )
    })
}

/// The error chain joined by `: `, skipping causes already spelled out by
/// the message that wraps them.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !last.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
        last = text;
    }
    out
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(UsageError("--workers must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow::anyhow!("cannot size worker pool: {e}"))?;
    }
    let cfg = CliConfig::load_or_default(cli.config.as_deref())?;
    match cli.command {
        Command::Preprocess(a) => commands::preprocess::run(a, &cfg),
        Command::Augment(a) => commands::dataset::augment(a, &cfg),
        Command::Split(a) => commands::dataset::split(a, &cfg),
        Command::Predict(a) => commands::predict::run(a, &cfg),
        Command::Eval(a) => commands::eval::run(a, &cfg),
        Command::Bench(a) => commands::bench::run(a, &cfg),
        Command::Render(a) => commands::render::run(a, &cfg),
        Command::ExportTrain(a) => commands::export::run(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            if is_usage(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
