//! Command-line front end for the four sweeps.

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lis_core::error::{Error, Result};
use lis_core::experiments::{run, Experiment, ExperimentConfig, RunOptions, SweepResult};
use lis_core::precision::Precision;

#[derive(Parser)]
#[command(name = "lis-sim", version, about = "Coupling-aware LIS directivity sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condition number of Z against element spacing.
    Conditioning(Common),
    /// Eigenvalue profile of Z for one spacing.
    Profile(Common),
    /// CA-pMF directivity against the number of retained modes.
    Truncation(Common),
    /// Directivity of a fixed panel against spacing, per scheme.
    Spacing(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination (default: the config's `output`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `double` or `ext:<bits>`.
    #[arg(long)]
    precision: Option<String>,
    /// Eigenvalue threshold of the truncated inverse.
    #[arg(long)]
    threshold: Option<f64>,
    /// No progress or summary on stderr.
    #[arg(long)]
    quiet: bool,
    /// Write Z, h and currents of every sweep point into this directory.
    #[arg(long, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::Conditioning(c) => (Experiment::Conditioning, c),
            Command::Profile(c) => (Experiment::Profile, c),
            Command::Truncation(c) => (Experiment::Truncation, c),
            Command::Spacing(c) => (Experiment::Spacing, c),
        }
    }
}

fn load(args: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &args.precision {
        cfg.precision = p
            .parse::<Precision>()
            .map_err(|e| Error::Config(format!("--precision: {e}")))?;
    }
    if let Some(t) = args.threshold {
        cfg.svd_threshold = t;
    }
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(experiment: Experiment, args: Common) -> Result<SweepResult> {
    let cfg = load(&args)?;
    let opts = RunOptions {
        dump_dir: args.dump_matrices.clone(),
        workers: None,
        progress: !args.quiet,
    };
    let result = run(experiment, &cfg, &opts)?;
    match &cfg.output {
        Some(path) => result.write_csv_file(path)?,
        None => result.write_csv(io::stdout().lock())?,
    }
    Ok(result)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = cli.command.split();
    let quiet = args.quiet;
    match execute(experiment, args) {
        Ok(result) => {
            if !quiet {
                let failed = result.rows.iter().filter(|r| !r.is_ok()).count();
                eprintln!("{experiment}: {} rows, {failed} with a non-ok status", result.rows.len());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("lis-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
