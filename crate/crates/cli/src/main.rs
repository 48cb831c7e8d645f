//! `gaussdim`: pressure curves, critical exponents and the bound checks from
//! a TOML run configuration.

// `!(x > y)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use commands::Output;
use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "gaussdim", version, about = "Dimension of weighted digit-product limsup sets")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Sampler seed; overrides `seed` in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pressure curve over the configured s grid.
    Pressure,
    /// A(s) and its minimizer over the configured s grid.
    Aofs,
    /// Critical exponent s0.
    Dim {
        #[arg(long)]
        tol: Option<f64>,
        /// Base B, replacing the configured one.
        #[arg(long = "B")]
        base: Option<f64>,
        /// Sweep the configured list of bases instead.
        #[arg(long)]
        sweep: bool,
    },
    /// s0 across the configured list of bases.
    Sweep {
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Cover costs and the growth-rate transition.
    Coverscan,
    /// Layout and summary of the Cantor construction.
    Cantor,
    /// Local-dimension ratios at sampled points of the Cantor set.
    Localdim,
    /// Runs the golden suite.
    Validate {
        /// Restrict to these criteria (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<gaussdim::Error>() {
        Some(gaussdim::Error::SizeCap { .. }) => EXIT_CAP,
        Some(gaussdim::Error::Numeric(_)) | Some(gaussdim::Error::Consistency(_)) => EXIT_NUMERIC,
        Some(_) => EXIT_CONFIG,
        None => 1,
    }
}

fn write_all(dir: &Path, out: &Output) -> anyhow::Result<()> {
    for (name, contents) in &out.files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None if matches!(cli.command, Command::Validate { .. }) => RunConfig::default(),
        None => anyhow::bail!(ConfigError("--config is required for this command".into())),
    };
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let output = match &cli.command {
        Command::Pressure => commands::pressure(&cfg)?,
        Command::Aofs => commands::aofs(&cfg)?,
        Command::Dim { tol, base, sweep } => commands::dim(&cfg, *tol, *base, *sweep)?,
        Command::Sweep { tol } => commands::sweep(&cfg, *tol)?,
        Command::Coverscan => commands::coverscan(&cfg)?,
        Command::Cantor => commands::cantor(&cfg)?,
        Command::Localdim => commands::localdim(&cfg)?,
        Command::Validate { only } => commands::validate(&cfg, only, |o| eprintln!("{}", o.line()))?,
    };
    write_all(&cfg.out, &output)?;
    println!("{}", output.message);
    Ok(!output.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
