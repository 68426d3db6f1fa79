use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mcflow::config::{Overrides, RunConfig};
use mcflow::run::{run_config_file, validate_config};

#[derive(Parser)]
#[command(
    name = "mcflow",
    about = "Multiphase mean curvature flow with decomposed mobilities on periodic grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run config and write diagnostics and snapshots
    Run {
        /// TOML run configuration
        config: PathBuf,
        /// Override the output directory
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the snapshot interval (steps)
        #[arg(long)]
        snapshot_every: Option<usize>,
        /// Suppress progress output
        #[arg(long)]
        quiet: bool,
    },
    /// Check a config and print its resolved parameters without running
    Validate {
        /// TOML run configuration
        config: PathBuf,
        /// Override the output directory
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the snapshot interval (steps)
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output_dir,
            snapshot_every,
            quiet,
        } => {
            let overrides = Overrides {
                output_dir,
                snapshot_every,
            };
            match run_config_file(&config, &overrides, quiet) {
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate {
            config,
            output_dir,
            snapshot_every,
        } => {
            let parsed = match RunConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            let overrides = Overrides {
                output_dir,
                snapshot_every,
            };
            let base_dir = config.parent().unwrap_or(Path::new("."));
            let report = validate_config(&parsed, base_dir, &stem(&config), &overrides);
            print!("{report}");
            if report.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
