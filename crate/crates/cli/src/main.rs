use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use llg_cli::{parse_config, print_version_and_provenance, resolve_output_dir, run, CliError, Command, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Action {
    Precession,
    Stepsize,
    EnergySurface,
    SingleStep,
    /// Print version, config hash and parameters.
    Provenance,
}

/// Structure-preserving time integration of the Landau-Lifshitz-Gilbert equation.
#[derive(Debug, Parser)]
#[command(name = "llg", version)]
struct Args {
    #[arg(value_enum)]
    command: Action,

    /// Config file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory; overrides the config and $LLG_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_config(&text)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = load(args.config.as_ref())?;
    let command = match args.command {
        Action::Provenance => {
            print!("{}", print_version_and_provenance(&cfg));
            return Ok(());
        }
        Action::Precession => Command::Precession,
        Action::Stepsize => Command::Stepsize,
        Action::EnergySurface => Command::EnergySurface,
        Action::SingleStep => Command::SingleStep,
    };
    let out = resolve_output_dir(args.out.as_deref(), &cfg);
    let outcome = run(command, &cfg, &out)?;
    let written = outcome.trajectories.len() + outcome.summary.iter().len() + outcome.surface.iter().len() + 1;
    println!("{command}: wrote {written} files to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::FAILURE
        }
    }
}
