use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use varlab::commands::{
    cmd_classify, cmd_colimit, cmd_metrics, cmd_moser, cmd_sweep, RunOptions,
};
use varlab::config::ExperimentConfig;
use varlab::{Error, Result};

/// Numerical laboratory for nonuniformly elliptic variational problems.
#[derive(Parser)]
#[command(name = "varlab", version, about)]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, default_value = "varlab.toml")]
    config: PathBuf,

    /// Output directory; overrides `out_dir` from the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed recorded in the run log; reserved for randomized variants.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify growth parameters against the sharp threshold.
    Classify,
    /// Solve the double-phase problem across a q grid and measure
    /// gradient regularity of each minimizer.
    Sweep,
    /// Materialize an integrability-exponent recurrence.
    Moser,
    /// Measure a stored field file.
    Metrics,
    /// Validate a claim diagram and print its colimit classes.
    Colimit,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    if cli.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    let config = ExperimentConfig::load(&cli.config)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let opts = RunOptions { out_dir, seed: cli.seed, threads: cli.threads };
    let missing = |name: &str| Error::Config(format!("config has no [{name}] section"));
    match cli.command {
        Command::Classify => {
            cmd_classify(config.classify.as_ref().ok_or_else(|| missing("classify"))?, &opts)
        }
        Command::Sweep => {
            cmd_sweep(config.sweep.as_ref().ok_or_else(|| missing("sweep"))?, &opts)
        }
        Command::Moser => {
            cmd_moser(config.moser.as_ref().ok_or_else(|| missing("moser"))?, &opts)
        }
        Command::Metrics => {
            cmd_metrics(config.metrics.as_ref().ok_or_else(|| missing("metrics"))?, &opts)
        }
        Command::Colimit => {
            cmd_colimit(config.colimit.as_ref().ok_or_else(|| missing("colimit"))?, &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
