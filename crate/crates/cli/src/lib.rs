//! Command-line experiments for the GKP oscillator codes. Every subcommand
//! but `checks` produces one CSV table; `checks` prints a pass/fail report.

pub mod checks;
pub mod experiments;
pub mod table;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::table::{Table, SCHEMA_VERSION};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "GKP_SEED";

pub const DEFAULT_SEED: u64 = 20191209;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] gkp_osc::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("metadata: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gkp", version, about = "Reproduce the GKP oscillator-code experiments as CSV")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Logical noise of the two-mode GKP repetition code.
    Fig3(RunArgs),
    /// Optimal gain of the GKP two-mode-squeezing code with ideal ancillas.
    Fig45(RunArgs),
    /// Optimal QEC gain with finitely squeezed GKP ancillas.
    Fig8(RunArgs),
    /// Scaling of the squeezed repetition code with the number of modes.
    AppendixD(AppendixArgs),
    /// Structural and normalization checks.
    Checks(ChecksArgs),
    /// Monte Carlo sweep of one code over a noise grid.
    Sweep(SweepArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GridArgs {
    #[arg(long)]
    pub sigma_min: Option<f64>,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Space the grid logarithmically.
    #[arg(long)]
    pub log: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for the Monte Carlo; results do not depend on it.
    #[arg(long, default_value_t = 4)]
    pub shards: usize,
    /// GKP ancilla squeezing in dB; `inf` for ideal ancillas. Repeatable.
    #[arg(long = "gkp-db")]
    pub gkp_db: Vec<f64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional JSON file recording the configuration and library version.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AppendixArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Design constant in `λ = √(2π)·c/σ`.
    #[arg(long, default_value_t = 0.08)]
    pub c: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ChecksArgs {
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Negative control: feed a matrix that is not symplectic into the
    /// invariant check.
    #[arg(long)]
    pub inject_non_symplectic: bool,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SweepCode {
    GaussianRepetition,
    GkpRepetition,
    GkpTms,
    GkpSqueezedRepetition,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = SweepCode::GkpTms)]
    pub code: SweepCode,
    /// Number of modes for the repetition codes.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Fixed gain of the two-mode squeezer; optimized per point when absent.
    #[arg(long)]
    pub gain: Option<f64>,
    /// Design constant of the squeezed repetition code.
    #[arg(long, default_value_t = 0.08)]
    pub c: f64,
}

/// Resolved noise grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    pub fn resolve(args: &GridArgs, default: Grid) -> Result<Grid, CliError> {
        let g = Grid {
            min: args.sigma_min.unwrap_or(default.min),
            max: args.sigma_max.unwrap_or(default.max),
            points: args.points.unwrap_or(default.points),
            log: args.log || default.log,
        };
        if !(g.min > 0.0 && g.min.is_finite() && g.max.is_finite()) {
            return Err(CliError::Config(format!("sigma range must be positive and finite, got [{}, {}]", g.min, g.max)));
        }
        if g.max < g.min {
            return Err(CliError::Config(format!("sigma-max {} is below sigma-min {}", g.max, g.min)));
        }
        if g.points < 2 {
            return Err(CliError::Config(format!("need at least 2 grid points, got {}", g.points)));
        }
        Ok(g)
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    (self.min.ln() + t * (self.max / self.min).ln()).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

pub(crate) fn validate_run(run: &RunArgs) -> Result<(), CliError> {
    if run.trials < 1 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    if run.shards < 1 {
        return Err(CliError::Config("shards must be at least 1".into()));
    }
    if let Some(db) = run.gkp_db.iter().find(|d| d.is_nan() || **d < 0.0) {
        return Err(CliError::Config(format!("gkp-db values must be >= 0 or inf, got {db}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct Metadata<'a, C: Serialize> {
    experiment: &'a str,
    schema_version: u32,
    library_version: &'a str,
    config: &'a C,
    grid: Option<Grid>,
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit<C: Serialize>(table: &Table, run: &RunArgs, config: &C, grid: Option<Grid>) -> Result<(), CliError> {
    let mut out = sink(&run.out)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &run.metadata {
        let meta = Metadata {
            experiment: table.name,
            schema_version: SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION"),
            config,
            grid,
        };
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &meta)?;
        f.write_all(b"\n")?;
        f.flush()?;
    }
    Ok(())
}

/// Runs one subcommand. `Ok(false)` means the checks ran but some failed.
pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Fig3(a) => {
            let (t, g) = experiments::fig3(a)?;
            emit(&t, a, a, Some(g))?;
        }
        Command::Fig45(a) => {
            let (t, g) = experiments::fig45(a)?;
            emit(&t, a, a, Some(g))?;
        }
        Command::Fig8(a) => {
            let (t, g) = experiments::fig8(a)?;
            emit(&t, a, a, Some(g))?;
        }
        Command::AppendixD(a) => {
            let (t, g) = experiments::appendix_d(a)?;
            emit(&t, &a.run, a, Some(g))?;
        }
        Command::Sweep(a) => {
            let (t, g) = experiments::sweep(a)?;
            emit(&t, &a.run, a, Some(g))?;
        }
        Command::Checks(a) => {
            let report = checks::run_checks(a.seed, a.inject_non_symplectic)?;
            let mut out = sink(&a.out)?;
            for c in &report {
                writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            out.flush()?;
            return Ok(report.iter().all(|c| c.pass));
        }
    }
    Ok(true)
}
