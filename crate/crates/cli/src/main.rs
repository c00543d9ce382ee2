//! Command-line driver: `run` one mode, `compare` both modes on shared
//! seeds, or `validate` a configuration file.
//!
//! Exit codes: 0 success, 1 configuration/validation failure, 2 I/O failure.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use diffnet::config::{load_config, ConfigError};
use diffnet::experiment::{run_experiment, ExperimentError, ExperimentSpec};
use diffnet::sim::{Mode, SimConfig};

#[derive(Parser)]
#[command(
    name = "diffnet",
    about = "Mobile adaptive network simulator: cooperative target estimation and pursuit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one cooperation mode and write its metric files.
    Run(RunArgs),
    /// Run both modes on identical seed sequences and write both sets of files.
    Compare(RunArgs),
    /// Load and validate a configuration, printing the resolved values.
    Validate {
        /// Configuration file (defaults apply when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (defaults apply when omitted).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for metric and snapshot files.
    #[arg(long, default_value = "output")]
    output: PathBuf,

    /// Override the configured base seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the configured number of Monte Carlo runs.
    #[arg(long)]
    runs: Option<usize>,

    /// Override the configured number of iterations per run.
    #[arg(long)]
    iterations: Option<usize>,

    /// Override the configured mode (`proposed` or `baseline_atc`).
    #[arg(long)]
    mode: Option<String>,

    /// Comma-separated iterations to capture node snapshots at.
    #[arg(long)]
    snapshots: Option<String>,

    /// Upper bound on run-level parallelism.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => execute(args, false),
        Command::Compare(args) => execute(args, true),
        Command::Validate { config } => validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(err: ExperimentError) -> Self {
        match err {
            ExperimentError::Config(inner) => CliError::from(inner),
            ExperimentError::Io { .. } => CliError::Io(err.to_string()),
        }
    }
}

fn resolve_config(path: Option<&PathBuf>) -> Result<SimConfig, CliError> {
    match path {
        Some(path) => Ok(load_config(path)?),
        None => Ok(SimConfig::default()),
    }
}

fn execute(args: RunArgs, compare: bool) -> Result<(), CliError> {
    let mut config = resolve_config(args.config.as_ref())?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(runs) = args.runs {
        config.n_runs = runs;
    }
    if let Some(iterations) = args.iterations {
        config.n_iterations = iterations;
    }
    if let Some(mode) = &args.mode {
        config.mode = parse_mode(mode)?;
    }
    let snapshot_iterations = parse_snapshots(args.snapshots.as_deref(), config.n_iterations)?;
    config.validate().map_err(CliError::from)?;

    let spec = ExperimentSpec {
        config,
        output_dir: args.output,
        compare,
        snapshot_iterations,
        jobs: args.jobs.max(1),
    };
    let output = run_experiment(&spec)?;
    for path in &output.files {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn validate(config: Option<PathBuf>) -> Result<(), CliError> {
    let config = resolve_config(config.as_ref())?;
    config.validate().map_err(CliError::from)?;
    println!(
        "ok: mode={} nodes={} dim={} iterations={} runs={} seed={}",
        config.mode.as_str(),
        config.n_nodes,
        config.dim,
        config.n_iterations,
        config.n_runs,
        config.base_seed
    );
    Ok(())
}

fn parse_mode(value: &str) -> Result<Mode, CliError> {
    match value {
        "proposed" => Ok(Mode::Proposed),
        "baseline_atc" => Ok(Mode::BaselineAtc),
        other => Err(CliError::Validation(format!(
            "--mode must be `proposed` or `baseline_atc`, got `{other}`"
        ))),
    }
}

fn parse_snapshots(arg: Option<&str>, n_iterations: usize) -> Result<BTreeSet<usize>, CliError> {
    let Some(arg) = arg else {
        return Ok(BTreeSet::new());
    };
    let mut out = BTreeSet::new();
    for part in arg.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let iter: usize = part.parse().map_err(|_| {
            CliError::Validation(format!("--snapshots: cannot parse `{part}` as an iteration"))
        })?;
        if iter == 0 || iter > n_iterations {
            return Err(CliError::Validation(format!(
                "--snapshots: iteration {iter} outside 1..={n_iterations}"
            )));
        }
        out.insert(iter);
    }
    Ok(out)
}
