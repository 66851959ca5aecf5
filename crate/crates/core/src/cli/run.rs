//! Stage dispatch, serialized artifact writes and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ModelChoice, KEYS};
use super::stages::{self, StageOutput};
use crate::error::{Error, Result};

/// A runnable unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    RayleighScan,
    RayleighEigen,
    PenroseScan,
    PenroseMode,
    SemigroupEvolve,
    SemigroupVerify,
    IllposedSweep,
    /// Every stage that applies to the configured model.
    Report,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::RayleighScan => "rayleigh scan",
            Self::RayleighEigen => "rayleigh eigen",
            Self::PenroseScan => "penrose scan",
            Self::PenroseMode => "penrose mode",
            Self::SemigroupEvolve => "semigroup evolve",
            Self::SemigroupVerify => "semigroup verify",
            Self::IllposedSweep => "illposed sweep",
            Self::Report => "report",
        }
    }

    fn stages(self, model: ModelChoice) -> Vec<Subcommand> {
        match self {
            Self::Report => {
                let mut v = match model {
                    ModelChoice::Hydro => vec![Self::RayleighScan, Self::RayleighEigen],
                    _ => vec![Self::PenroseScan, Self::PenroseMode],
                };
                v.extend([Self::SemigroupEvolve, Self::SemigroupVerify, Self::IllposedSweep]);
                v
            }
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub pass: bool,
    pub message: String,
    pub wall_seconds: f64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Summary of one invocation, written last as `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub threads: usize,
    /// Effective configuration as `(key, value)` pairs.
    pub config: Vec<(String, String)>,
    pub stages: Vec<StageRecord>,
    pub files: Vec<FileRecord>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.pass { 0 } else { 1 }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn run_stage(cfg: &ExperimentConfig, s: Subcommand) -> StageOutput {
    let r = match s {
        Subcommand::RayleighScan => stages::rayleigh_scan(cfg),
        Subcommand::RayleighEigen => stages::rayleigh_eigen(cfg),
        Subcommand::PenroseScan => stages::penrose_scan(cfg),
        Subcommand::PenroseMode => stages::penrose_mode(cfg),
        Subcommand::SemigroupEvolve => stages::semigroup_evolve(cfg),
        Subcommand::SemigroupVerify => stages::semigroup_verify(cfg),
        Subcommand::IllposedSweep => stages::illposed_sweep(cfg),
        Subcommand::Report => unreachable!("report expands into stages"),
    };
    r.unwrap_or_else(|e| StageOutput { name: s.name().into(), pass: false, message: e.to_string(), files: vec![] })
}

/// Runs `cmd` under `cfg`, writes artifacts into `cfg.output.dir` and returns the manifest.
///
/// Stage failures are recorded in the manifest; only I/O problems are errors.
pub fn run(cfg: &ExperimentConfig, cmd: Subcommand) -> Result<RunOutcome> {
    let out_dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&out_dir)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if cfg.run.threads > 0 {
        builder = builder.num_threads(cfg.run.threads);
    }
    let pool = builder.build().map_err(|e| Error::Internal(format!("thread pool: {e}")))?;

    let mut files = Vec::new();
    let mut records = Vec::new();
    let echo = cfg.echo();
    write_file(&out_dir, "effective_config.txt", echo.as_bytes(), &mut files)?;

    for s in cmd.stages(cfg.run.model) {
        let t0 = Instant::now();
        let out = pool.install(|| run_stage(cfg, s));
        let wall = t0.elapsed().as_secs_f64();
        let mut names = Vec::new();
        for (name, bytes) in &out.files {
            write_file(&out_dir, name, bytes, &mut files)?;
            names.push(name.clone());
        }
        records.push(StageRecord { name: out.name, pass: out.pass, message: out.message, wall_seconds: wall, files: names });
    }

    let manifest = RunManifest {
        tool: "ilab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cmd.name().into(),
        seed: cfg.run.seed,
        threads: pool.current_num_threads(),
        config: KEYS.iter().map(|k| (k.to_string(), cfg.get(k))).collect(),
        pass: records.iter().all(|r| r.pass),
        stages: records,
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(out_dir.join("manifest.json"), text)?;
    Ok(RunOutcome { manifest, out_dir })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], inventory: &mut Vec<FileRecord>) -> Result<()> {
    std::fs::write(dir.join(name), bytes)?;
    inventory.push(FileRecord { path: name.into(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
    Ok(())
}
