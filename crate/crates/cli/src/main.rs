use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ti_papr::harness::{run_command, Command, ExperimentConfig, Runner};

/// Tone-injection PAPR experiments. Each command writes one CSV table.
#[derive(Parser)]
#[command(name = "ti-papr", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// PAPR CCDF of the configured scheme.
    Ccdf(Common),
    /// Symbol error rate over the Es/N0 grid through the soft limiter.
    Ser(Common),
    /// Average transmit power increase of the configured scheme.
    Power(Common),
    /// Lagged power covariance of oversampled samples against the closed form.
    Covcheck(Common),
    /// Scoring cost counters across subcarrier counts.
    Complexity(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output CSV; stdout when neither this nor the config names one.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_name = "INT")]
    workers: Option<usize>,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (cmd, common) = match cli.command {
        Cmd::Ccdf(c) => (Command::Ccdf, c),
        Cmd::Ser(c) => (Command::Ser, c),
        Cmd::Power(c) => (Command::Power, c),
        Cmd::Covcheck(c) => (Command::Covcheck, c),
        Cmd::Complexity(c) => (Command::Complexity, c),
    };
    let mut cfg = load_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.monte_carlo.seed = seed;
    }
    let workers = match common.workers {
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let runner = Runner::new(workers)?;
    let csv = run_command(cmd, &cfg, &runner)?.to_csv();

    let out = common.out.or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match out {
        Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
