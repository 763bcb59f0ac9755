use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use risleo::commands::{run, Command};
use risleo::config::{Overrides, RunConfig};
use risleo::Error;

/// Link-level simulator for RIS-assisted LEO satellite downlinks in urban
/// canyons.
#[derive(Debug, Parser)]
#[command(name = "risleo", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (overrides `run.workers`).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Comma-separated SAT elevations in degrees for the chosen command.
    #[arg(long, global = true, value_delimiter = ',')]
    elevations: Option<Vec<f64>>,

    /// Constellation preset (overrides `constellation.preset`).
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Seed for the random geometries of `validate`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// SNR heat maps over the street, one CSV per SAT elevation.
    Coverage,
    /// Tilted-panel SNR versus tilt angle for a set of users.
    TiltSweep,
    /// Two facing panels served by satellites on opposite sides.
    DoubleRis,
    /// Blockage ratio, Q_min and Q_th for the built-in shells.
    BlockageTable,
    /// Closed forms against reference computations.
    Validate,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let command = match cli.command {
        Cmd::Coverage => Command::Coverage,
        Cmd::TiltSweep => Command::TiltSweep,
        Cmd::DoubleRis => Command::DoubleRis,
        Cmd::BlockageTable => Command::BlockageTable,
        Cmd::Validate => Command::Validate,
    };
    let mut config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit_code(&e));
            }
        },
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        out: cli.out,
        workers: cli.workers,
        elevations_deg: cli.elevations,
        preset: cli.preset,
        seed: cli.seed,
    };
    config.apply(&overrides, command.elevation_target());

    match run(command, &config) {
        Ok(out) => {
            print!("{}", out.summary);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: validation failed");
                ExitCode::from(EXIT_VALIDATION)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
