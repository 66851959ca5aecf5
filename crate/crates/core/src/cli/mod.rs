//! Configuration, orchestration and artifact output.
//!
//! ```text
//! ilab [--config PATH] [--out DIR] [--seed N] [--threads N] [--model M] [--mode M] <command>
//! ```

pub mod config;
pub mod run;
pub mod stages;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand as ClapSubcommand};

pub use config::{parse_config, ExperimentConfig, ModelChoice};
pub use run::{run, RunManifest, RunOutcome, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "ilab", version, about = "Instability and ill-posedness experiments")]
struct Cli {
    /// Configuration file (`key = value` with `[section]` headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// hydro, kie or vdb.
    #[arg(long, global = true)]
    model: Option<String>,
    /// linear or nonlinear (ill-posedness sweeps).
    #[arg(long, global = true)]
    mode: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, ClapSubcommand)]
enum Command {
    /// Hydrostatic Rayleigh problem.
    Rayleigh {
        #[command(subcommand)]
        action: RayleighAction,
    },
    /// Kinetic dispersion relation.
    Penrose {
        #[command(subcommand)]
        action: PenroseAction,
    },
    /// Per-mode linear evolution and growth bounds.
    Semigroup {
        #[command(subcommand)]
        action: SemigroupAction,
    },
    /// Oscillatory-data sweeps.
    Illposed {
        #[command(subcommand)]
        action: IllposedAction,
    },
    /// Every stage for the configured model.
    Report,
}

#[derive(Debug, ClapSubcommand)]
enum RayleighAction {
    /// Roots of the Evans function in the search box.
    Scan,
    /// Eigenfunction of the most unstable root.
    Eigen,
}

#[derive(Debug, ClapSubcommand)]
enum PenroseAction {
    Scan,
    Mode,
}

#[derive(Debug, ClapSubcommand)]
enum SemigroupAction {
    Evolve,
    Verify,
}

#[derive(Debug, ClapSubcommand)]
enum IllposedAction {
    Sweep,
}

impl Command {
    fn subcommand(&self) -> Subcommand {
        match self {
            Command::Rayleigh { action: RayleighAction::Scan } => Subcommand::RayleighScan,
            Command::Rayleigh { action: RayleighAction::Eigen } => Subcommand::RayleighEigen,
            Command::Penrose { action: PenroseAction::Scan } => Subcommand::PenroseScan,
            Command::Penrose { action: PenroseAction::Mode } => Subcommand::PenroseMode,
            Command::Semigroup { action: SemigroupAction::Evolve } => Subcommand::SemigroupEvolve,
            Command::Semigroup { action: SemigroupAction::Verify } => Subcommand::SemigroupVerify,
            Command::Illposed { action: IllposedAction::Sweep } => Subcommand::IllposedSweep,
            Command::Report => Subcommand::Report,
        }
    }
}

fn build_config(cli: &Cli) -> crate::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_env(std::env::vars())?;
    let flag = |r: std::result::Result<(), String>| r.map_err(|msg| crate::Error::Config { line: 0, msg });
    if let Some(v) = &cli.out {
        cfg.output.dir = v.clone();
    }
    if let Some(v) = cli.seed {
        cfg.run.seed = v;
    }
    if let Some(v) = cli.threads {
        cfg.run.threads = v;
    }
    if let Some(v) = &cli.model {
        flag(cfg.set("run.model", v))?;
    }
    if let Some(v) = &cli.mode {
        flag(cfg.set("illposed.mode", v))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Entry point of the `ilab` binary; returns the process exit code.
///
/// 0 when every stage passes, 1 when a stage fails, 2 for configuration or I/O errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ilab: {e}");
            return 2;
        }
    };
    let cmd = cli.command.subcommand();
    match run(&cfg, cmd) {
        Ok(outcome) => {
            for s in &outcome.manifest.stages {
                let flag = if s.pass { "PASS" } else { "FAIL" };
                if s.message.is_empty() {
                    println!("{flag} {} ({:.2}s)", s.name, s.wall_seconds);
                } else {
                    println!("{flag} {} ({:.2}s): {}", s.name, s.wall_seconds, s.message);
                }
            }
            println!("artifacts in {}", outcome.out_dir.display());
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("ilab: {e}");
            2
        }
    }
}
