use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use graphon_control::cli;
use graphon_control::config::{load_config, preset, ExperimentConfig};
use graphon_control::error::Error;

/// Sparse optimal control of graphon-limit networked systems.
#[derive(Parser)]
#[command(name = "graphon-control", version, about)]
struct Args {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in preset: example1, example2-l1, example2-mcp, example3.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output directory for CSVs and reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for the randomized cut-norm search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured control problem and export its artifacts.
    Solve,
    /// Solve across the configured lambda list and tabulate the trade-off.
    Sweep,
    /// Solve and emit the bang-off-bang certificate.
    Certify,
    /// Run the spectral controllability test.
    Controllability,
    /// Compute the cut norm and sandwich chain of the configured graphon.
    Cutnorm,
    /// Run the limit-control approximation experiment.
    Approximate,
}

fn resolve_config(args: &Args) -> Result<ExperimentConfig, Error> {
    match (&args.config, &args.preset) {
        (Some(path), None) => load_config(path),
        (None, Some(name)) => preset(name),
        (Some(_), Some(_)) => Err(Error::Config(
            "pass either --config or --preset, not both".into(),
        )),
        (None, None) => Err(Error::Config(
            "a configuration is required: pass --config PATH or --preset NAME".into(),
        )),
    }
}

fn run(args: &Args) -> Result<(), Error> {
    let cfg = resolve_config(args)?;
    let written = match args.command {
        Command::Solve => cli::cmd_solve(&cfg, &args.out)?,
        Command::Sweep => cli::cmd_sweep(&cfg, &args.out)?,
        Command::Certify => cli::cmd_certify(&cfg, &args.out)?,
        Command::Controllability => cli::cmd_controllability(&cfg, &args.out)?,
        Command::Cutnorm => cli::cmd_cutnorm(&cfg, &args.out, args.seed)?,
        Command::Approximate => cli::cmd_approximate(&cfg, &args.out, args.seed)?,
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
