//! `semiexp`: rate functions, regimes, samplers and rare-event estimators
//! for sums of Weibull-like variables, emitted as JSON or CSV.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use config::{load_file, overlay, present_fields, FileConfig};
use error::{CliError, CliResult};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "semiexp", version, about = "Large deviations for sums of Weibull-like variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format [default: json].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Base seed for every random stream [default: 1].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON or TOML file with parameters; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical constants and the transition rate J(C).
    Rate(commands::RateArgs),
    /// Regime, speed and limit for x_n = C n^alpha.
    Regimes(commands::RegimesArgs),
    /// Seeded draws from the raw, conditional or tilted truncated law.
    Sample(commands::SampleArgs),
    /// One estimate of log P(S_n >= x).
    Simulate(commands::SimulateArgs),
    /// Speed-normalized estimates over increasing n.
    Sweep(commands::SweepArgs),
    /// Interpolation table, truncated-term limit, analytic bounds, max-jump split.
    Verify(commands::VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rate(_) => "rate",
            Command::Regimes(_) => "regimes",
            Command::Sample(_) => "sample",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Verify(_) => "verify",
        }
    }
}

fn global<T: serde::de::DeserializeOwned>(file: &FileConfig, key: &str) -> CliResult<Option<T>> {
    file.globals
        .get(key)
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| CliError::domain(format!("invalid {key} in config: {e}"))))
        .transpose()
}

fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let name = cli.command.name();
    if let Some(c) = global::<String>(&file, "command")? {
        if c != name {
            return Err(CliError::domain(format!("config file is for `{c}`, not `{name}`")));
        }
    }
    let seed = cli.seed.or(global(&file, "seed")?).unwrap_or(DEFAULT_SEED);
    let format = cli.format.or(global(&file, "format")?).unwrap_or(Format::Json);
    let output = cli.output.clone().or(global::<PathBuf>(&file, "output")?);
    let threads = cli.threads.or(global(&file, "threads")?);
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::domain("threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }

    let params = &file.params;
    let (resolved, report) = match &cli.command {
        Command::Rate(a) => commands::rate(overlay(params, present_fields(a)))?,
        Command::Regimes(a) => commands::regimes(overlay(params, present_fields(a)))?,
        Command::Sample(a) => commands::sample(overlay(params, present_fields(a)), seed)?,
        Command::Simulate(a) => commands::simulate(overlay(params, present_fields(a)), seed)?,
        Command::Sweep(a) => commands::sweep_cmd(overlay(params, present_fields(a)), seed)?,
        Command::Verify(a) => commands::verify(overlay(params, present_fields(a)), seed)?,
    };

    // Thread count and output path do not affect results and are not echoed.
    let mut config = Map::new();
    config.insert("command".into(), Value::from(name));
    config.insert("seed".into(), Value::from(seed));
    config.insert("format".into(), serde_json::to_value(format).unwrap_or(Value::Null));
    config.extend(resolved);

    let text = match format {
        Format::Json => output::render_json(&config, seed, &report),
        Format::Csv => output::render_csv(&config, seed, &report),
    };
    match output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
