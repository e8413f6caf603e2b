//! Batch driver: experiment configs in, deterministic JSON/CSV reports and a checksummed manifest out.

pub mod config;
pub mod report;
pub mod tasks;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Task};
pub use report::{Artifact, Format, Gate, GateStatus, Manifest, emit_report};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub task: Task,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Relative paths in the config resolve against this directory.
    pub base_dir: PathBuf,
}

/// Validates everything, runs the task, writes the reports and then the manifest.
///
/// Input errors return before anything is written.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<Manifest, CliError> {
    let resolved = config::validate(config, opts.task, &opts.base_dir, opts.seed)?;
    let out = match (&opts.out, &config.output) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) if o.is_absolute() => o.clone(),
        (None, Some(o)) => opts.base_dir.join(o),
        (None, None) => Path::new("lidskii-out").join(&resolved.name),
    };
    std::fs::create_dir_all(&out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;

    let outcome = tasks::run(&resolved);
    let files = emit_report(&out, &outcome.artifacts, None)?;
    let manifest = Manifest {
        name: resolved.name.clone(),
        task: resolved.task.name(),
        seed: resolved.seed,
        status: report::overall(&outcome.gates),
        gates: outcome.gates,
        files,
    };
    emit_report(&out, &[Artifact::json(MANIFEST, &manifest)], None)?;
    Ok(manifest)
}

/// Exit status for a finished run: 0 when every gate passed, 1 otherwise.
pub fn exit_code(manifest: &Manifest) -> i32 {
    if manifest.passed() { 0 } else { 1 }
}
