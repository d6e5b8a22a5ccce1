use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ksch::experiments::{self, RunConfig};

#[derive(Parser)]
#[command(name = "ksch", version, about = "Relaxed degenerate Cahn-Hilliard / generalized Keller-Segel simulator")]
#[command(after_help = "Exit status: 0 all monitors passed, 2 a monitor was violated, 1 error.\n\
                        Worker threads are taken from KSCH_THREADS (default: all cores).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single trajectory with diagnostics and snapshots.
    Run(Common),
    /// Relaxation sweep against the sigma = 0 reference.
    SweepSigma(Common),
    /// Pressure-exponent sweep toward the incompressible limit.
    SweepGamma(Common),
    /// Cahn-Hilliard form against Keller-Segel form under refinement.
    Equivalence(Common),
    /// Spectral Galerkin against finite volume.
    GalerkinCompare(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults are used for anything missing.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: PathBuf,
    /// `section.key=value`, applied after the config file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::Run(c) => ("run", c),
            Command::SweepSigma(c) => ("sweep-sigma", c),
            Command::SweepGamma(c) => ("sweep-gamma", c),
            Command::Equivalence(c) => ("equivalence", c),
            Command::GalerkinCompare(c) => ("galerkin-compare", c),
        }
    }
}

fn load(common: &Common) -> ksch::Result<RunConfig> {
    match &common.config {
        Some(path) => RunConfig::load(path, &common.overrides),
        None => RunConfig::from_toml_with_overrides("", &common.overrides),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.split();
    let report = load(common).and_then(|cfg| experiments::execute(name, &cfg, Some(&common.out)));
    match report {
        Ok(r) if r.passed => {
            println!("{name}: passed ({})", common.out.display());
            ExitCode::SUCCESS
        }
        Ok(r) => {
            for v in &r.violations {
                eprintln!("violation: {v}");
            }
            println!("{name}: {} violation(s) ({})", r.violations.len(), common.out.display());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
