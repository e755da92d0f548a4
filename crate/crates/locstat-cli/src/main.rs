//! Command-line experiment runner.
//!
//! One verb per capability, each driven by a JSON config document:
//!
//! ```text
//! locstat <asympt|pickands|tail|compare|validate|sandwich>
//!         --config <path> [--seed <u64>] [--out <dir>] [--threads <n>]
//! ```
//!
//! Exit codes: 0 success, 1 config error, 2 numerical/model error. The
//! only environment override is `LOCSTAT_THREADS` (worker count).

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use locstat::{Error, Result};

use config::{parse_config, ExperimentConfig};
use run::{run, Effective};

const USAGE: &str = "usage: locstat <asympt|pickands|tail|compare|validate|sandwich> \
--config <path> [--seed <u64>] [--out <dir>] [--threads <n>]";

const VERBS: [&str; 6] = ["asympt", "pickands", "tail", "compare", "validate", "sandwich"];

struct CliArgs {
    verb: String,
    config_path: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

fn config_err(message: impl Into<String>, path: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

fn parse_args(mut args: impl Iterator<Item = String>) -> Result<CliArgs> {
    let verb = args
        .next()
        .ok_or_else(|| config_err(format!("missing subcommand; {USAGE}"), "argv"))?;
    if !VERBS.contains(&verb.as_str()) {
        return Err(config_err(format!("unknown subcommand `{verb}`; {USAGE}"), "argv"));
    }
    let mut config_path = None;
    let mut seed = None;
    let mut out = None;
    let mut threads = None;
    while let Some(flag) = args.next() {
        let mut value = |name: &str| {
            args.next()
                .ok_or_else(|| config_err(format!("flag {name} needs a value"), "argv"))
        };
        match flag.as_str() {
            "--config" => config_path = Some(PathBuf::from(value("--config")?)),
            "--seed" => {
                let raw = value("--seed")?;
                seed = Some(raw.parse::<u64>().map_err(|_| {
                    config_err(format!("--seed must be a u64, got `{raw}`"), "argv")
                })?);
            }
            "--out" => out = Some(PathBuf::from(value("--out")?)),
            "--threads" => {
                let raw = value("--threads")?;
                threads = Some(raw.parse::<usize>().map_err(|_| {
                    config_err(format!("--threads must be a positive integer, got `{raw}`"), "argv")
                })?);
            }
            other => {
                return Err(config_err(format!("unknown flag `{other}`; {USAGE}"), "argv"));
            }
        }
    }
    let config_path =
        config_path.ok_or_else(|| config_err(format!("--config is required; {USAGE}"), "argv"))?;
    Ok(CliArgs { verb, config_path, seed, out, threads })
}

fn load_config(args: &CliArgs) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config_path).map_err(|e| {
        config_err(format!("cannot read config: {e}"), args.config_path.display().to_string())
    })?;
    let config = parse_config(&text)?;
    if config.name() != args.verb {
        return Err(config_err(
            format!(
                "config describes experiment `{}` but the subcommand is `{}`",
                config.name(),
                args.verb
            ),
            "experiment",
        ));
    }
    Ok(config)
}

fn effective_settings(args: &CliArgs, config: &ExperimentConfig) -> Result<Effective> {
    let threads = args
        .threads
        .or_else(|| {
            std::env::var("LOCSTAT_THREADS").ok().and_then(|v| v.parse::<usize>().ok())
        })
        .or_else(|| config.threads());
    if let Some(n) = threads {
        if n == 0 {
            return Err(config_err("thread count must be positive", "threads"));
        }
        // Build errors only when a pool already exists; results are
        // order-stable regardless of worker count.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out_dir().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Effective { seed: args.seed.or_else(|| config.seed()).unwrap_or(0), out_dir, threads })
}

fn try_main() -> Result<()> {
    let args = parse_args(std::env::args().skip(1))?;
    let config = load_config(&args)?;
    let eff = effective_settings(&args, &config)?;
    let outcome = run(config, &eff)?;
    eprintln!(
        "{} finished in {:.3}s; wrote {}",
        outcome.report.config.name(),
        outcome.report.wall_time_s,
        outcome
            .files
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
