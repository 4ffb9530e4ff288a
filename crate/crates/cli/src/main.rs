use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use optbasis_cli::commands::{self, write_artifacts, Artifact};
use optbasis_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "optbasis", version, about = "Karhunen-Loeve basis construction and spectral radial solves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Sample the orbital family and write the KL basis artifacts.
    GenBasis(Common),
    /// Solve the boundary-value problem in the truncated basis.
    Solve(Common),
    /// Scan the residual norm over an energy range.
    ScanEnergy(Common),
    /// Compare KL, random orthonormal and raised monomial bases.
    CompareBases(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `output.directory`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = &self.out_dir {
            cfg.output.directory = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

type Subcommand = fn(&RunConfig) -> Result<Vec<Artifact>, CliError>;

fn run(cli: &Cli) -> Result<(), CliError> {
    let (common, command): (&Common, Subcommand) = match &cli.command {
        Command::GenBasis(c) => (c, commands::gen_basis),
        Command::Solve(c) => (c, commands::solve),
        Command::ScanEnergy(c) => (c, commands::scan_energy),
        Command::CompareBases(c) => (c, commands::compare_bases),
    };
    let cfg = common.resolve()?;
    let artifacts = command(&cfg)?;
    write_artifacts(&cfg.output.directory, &artifacts)
}

fn main() -> ExitCode {
    // usage errors are configuration errors, not numerical ones
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("optbasis: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
