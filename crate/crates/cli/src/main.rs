use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use csbohm_cli::config::{parse, ConfigFile};
use csbohm_cli::{run_experiment, write_artifacts, CliError, ExperimentConfig, ExperimentKind};

const DEFAULT_OUT: &str = "csbohm-out";

/// Numerical experiments for the causally symmetric pilot-wave model.
#[derive(Parser, Debug)]
#[command(name = "csbohm", version)]
struct Args {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run whatever `kind` the config names.
    Run,
    WeakValue,
    EntangledValue,
    SpinMap,
    Evolve,
    Fields,
    Trajectories,
    BornCheck,
    AppendixCheck,
    Equivariance,
}

impl Command {
    fn kind(self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Run => return None,
            Command::WeakValue => ExperimentKind::WeakValue,
            Command::EntangledValue => ExperimentKind::EntangledValue,
            Command::SpinMap => ExperimentKind::SpinMap,
            Command::Evolve => ExperimentKind::Evolve,
            Command::Fields => ExperimentKind::Fields,
            Command::Trajectories => ExperimentKind::Trajectories,
            Command::BornCheck => ExperimentKind::BornCheck,
            Command::AppendixCheck => ExperimentKind::AppendixCheck,
            Command::Equivariance => ExperimentKind::Equivariance,
        })
    }
}

fn load(args: &Args) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", path.display())))?;
            parse(&text)?
        }
        None if args.command.kind().is_none() => {
            return Err(CliError::ConfigInvalid("`run` needs --config".into()));
        }
        None => ConfigFile::default(),
    };
    let cfg = ExperimentConfig::resolve(file, args.command.kind())?;
    match args.seed {
        Some(s) => cfg.with_seed(s),
        None => Ok(cfg),
    }
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let cfg = load(args)?;
    let out = args.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let artifacts = run_experiment(&cfg)?;
    let written = write_artifacts(&out, &artifacts)?;
    if !args.quiet {
        println!("{}", serde_json::to_string_pretty(&artifacts.summary).unwrap_or_default());
        for p in &written {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(artifacts.pass)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("csbohm: experiment failed: criterion not met");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("csbohm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
