//! Command-line runner for the nonautonomous symbolic dynamics estimators.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::Resolved;
use output::OutDir;

#[derive(Debug)]
pub enum CliError {
    /// Malformed or missing configuration (exit 2).
    Config(String),
    /// A theorem hypothesis is violated by the inputs (exit 4).
    Hypothesis(String),
    /// An estimator could not reach a determination (exit 3).
    Undetermined(String),
}

impl From<nasym::Error> for CliError {
    fn from(e: nasym::Error) -> Self {
        match e {
            nasym::Error::Undetermined(m) => CliError::Undetermined(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nasym",
    about = "Pressures, entropies, and equilibrium states of nonautonomous symbolic systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV/JSON artifacts (summaries always print to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides run.depth_max.
    #[arg(long)]
    depth: Option<usize>,
    /// Overrides run.window, as LO..HI.
    #[arg(long, value_parser = parse_window)]
    window: Option<(usize, usize)>,
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let lo = lo.trim().parse().map_err(|e| format!("window lo: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("window hi: {e}"))?;
    if lo == 0 || hi < lo {
        return Err(format!("window {lo}..{hi} must satisfy 1 <= lo <= hi"));
    }
    Ok((lo, hi))
}

#[derive(Subcommand)]
enum Command {
    /// Capacity pressure window and critical-exponent bisections.
    Pressure(CommonArgs),
    /// Pressure of the zero potential.
    Entropy(CommonArgs),
    /// Bernoulli-measure entropy/pressure, LLN verdicts, Gibbs ratios.
    Measure(CommonArgs),
    /// Derive the equilibrium Bernoulli spec and verify its identity.
    Equilibrium(CommonArgs),
    /// Coding diagnostics for the configured system.
    Code(CommonArgs),
    /// Run the invariant property suite.
    Verify {
        /// Only run properties whose name contains this substring.
        #[arg(long)]
        only: Option<String>,
        /// Inject a named fault to confirm detection (e.g.
        /// softmax-denominator).
        #[arg(long)]
        inject: Option<String>,
    },
}

fn run(args: &CommonArgs, f: impl FnOnce(&Resolved, &OutDir) -> Result<i32, CliError>) -> i32 {
    let resolved = match Resolved::load(&args.config, args.seed, args.depth, args.window) {
        Ok(r) => r,
        Err(e) => return report(e),
    };
    let out = match OutDir::new(args.out.clone(), &resolved.hash) {
        Ok(o) => o,
        Err(e) => return report(e),
    };
    match f(&resolved, &out) {
        Ok(code) => code,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> i32 {
    match e {
        CliError::Config(msg) => {
            eprintln!("config error: {msg}");
            2
        }
        CliError::Undetermined(msg) => {
            eprintln!("undetermined: {msg}");
            3
        }
        CliError::Hypothesis(msg) => {
            eprintln!("hypothesis violation: {msg}");
            4
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Pressure(args) => run(args, |cfg, out| commands::cmd_pressure(cfg, out, false)),
        Command::Entropy(args) => run(args, |cfg, out| commands::cmd_pressure(cfg, out, true)),
        Command::Measure(args) => run(args, commands::cmd_measure),
        Command::Equilibrium(args) => run(args, commands::cmd_equilibrium),
        Command::Code(args) => run(args, commands::cmd_code),
        Command::Verify { only, inject } => verify::run_suite(only.as_deref(), inject.as_deref()),
    };
    std::process::exit(code);
}
