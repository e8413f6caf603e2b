use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lidskii_cli::{CliError, ExperimentConfig, RunOptions, Task, exit_code, run_experiment};

#[derive(Parser)]
#[command(name = "lidskii", version, about = "Abel-Lidskii summation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized step; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "LIDSKII_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Convergence exponent, genus and beta profile of a modulus sequence
    AnalyzeExponent,
    /// Root-vector decomposition and invariant-subspace checks
    Decompose,
    /// Abel-Lidskii partial sums against the direct series
    Sum,
    /// Contour integrals against residues and group sums
    ContourVerify,
    /// Fractional Cauchy problem D^{1/alpha} u = W u with a chosen backend
    Evolve,
    /// Seeded built-in verification suite
    FullVerify,
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::AnalyzeExponent => Task::ExponentAnalysis,
            Command::Decompose => Task::Decompose,
            Command::Sum => Task::Sum,
            Command::ContourVerify => Task::ContourVerify,
            Command::Evolve => Task::Evolve,
            Command::FullVerify => Task::FullVerify,
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    let task = cli.command.task();
    let (config, base_dir) = match &cli.config {
        Some(path) => {
            let base = path.parent().map(PathBuf::from).unwrap_or_default();
            (ExperimentConfig::from_path(path)?, base)
        }
        None if task == Task::FullVerify => (ExperimentConfig::named("full-verify"), PathBuf::from(".")),
        None => return Err(CliError::Input(format!("{} needs --config", task.name()))),
    };
    let opts = RunOptions { task, out: cli.out, seed: cli.seed, base_dir };
    let manifest = run_experiment(&config, &opts)?;
    for g in &manifest.gates {
        let value = g.value.map(|v| format!(" {v:.3e}")).unwrap_or_default();
        eprintln!("{:<8} {}{}", format!("{:?}", g.status).to_lowercase(), g.name, value);
    }
    Ok(exit_code(&manifest))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("lidskii: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
