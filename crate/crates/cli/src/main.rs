mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use serde_json::{json, Value};

use adsweyl::solver::SolveError;
use adsweyl::Error;
use config::{Command, ConfigError, RunConfig};
use output::OutputDir;

/// Convex Cauchy surfaces in AdS and Minkowski spacetimes and their intrinsic metrics.
#[derive(Parser)]
#[command(name = "adsweyl", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_GEOMETRY: u8 = 4;

fn library_code(e: &Error) -> u8 {
    match e {
        Error::Diverged(_) | Error::CelluationJump(_) | Error::AlignmentFailure(_) => EXIT_DIVERGED,
        Error::InvalidInput(_)
        | Error::Parse(_)
        | Error::InfeasibleTarget(_)
        | Error::InvalidTriangulation(_)
        | Error::DegenerateTriangle(..)
        | Error::ConstructionError(_)
        | Error::UnsupportedCurve(_) => EXIT_VALIDATION,
        _ => EXIT_GEOMETRY,
    }
}

fn classify(e: &anyhow::Error) -> (u8, &'static str) {
    for cause in e.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return (EXIT_VALIDATION, "Config");
        }
        if let Some(s) = cause.downcast_ref::<SolveError>() {
            return (library_code(&s.error), s.error.kind());
        }
        if let Some(l) = cause.downcast_ref::<Error>() {
            return (library_code(l), l.kind());
        }
    }
    (1, "Io")
}

fn record(e: &anyhow::Error) -> Value {
    let (code, kind) = classify(e);
    json!({ "kind": kind, "message": format!("{e:#}"), "exit_code": code })
}

fn run(cli: &Cli) -> Result<()> {
    let (cfg, echo) = RunConfig::load(&cli.config)?;
    if let Some(c) = cfg.command {
        if c != cli.command {
            return Err(ConfigError(format!(
                "config is for `{}`, not `{}`",
                c.name(),
                cli.command.name()
            ))
            .into());
        }
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let dir = match (&cli.out, &cfg.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => cfg.resolve(d),
        (None, None) => PathBuf::from("out"),
    };
    let mut out = OutputDir::open(&dir)?;
    match commands::dispatch(cli.command, &cfg, &mut out, seed) {
        Ok(verdicts) => out.finish(cli.command.name(), seed, &echo, verdicts),
        Err(e) => {
            out.write_error(&record(&e));
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let r = record(&e);
            eprintln!("{r}");
            ExitCode::from(classify(&e).0)
        }
    }
}
