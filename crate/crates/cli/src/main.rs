use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use hadamard_cli::commands::{self, OracleShape, StudyOverrides};
use hadamard_cli::{CliError, ConfigError};
use hadamard_core::harness::FormSelection;

/// Eigenvalue perturbation studies for the Neumann Laplacian.
#[derive(Parser)]
#[command(name = "hadamard", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Boundary,
    Volume,
    Both,
}

impl From<FormArg> for FormSelection {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Boundary => FormSelection::Boundary,
            FormArg::Volume => FormSelection::Volume,
            FormArg::Both => FormSelection::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Square,
    Rectangle,
    Disk,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenvalues of the reference domain.
    Eig {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        /// Write the coarse reference mesh to this file.
        #[arg(long)]
        dump_mesh: Option<PathBuf>,
    },
    /// Predicted cluster shifts for one amplitude.
    Predict {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the first configured amplitude.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum)]
        form: Option<FormArg>,
    },
    /// Amplitude sweep with remainder table and optional plot.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        form: Option<FormArg>,
        /// Takes precedence over HADAMARD_WORKERS and the configuration.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        plot: bool,
        /// Output directory, replacing the configured one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic Neumann spectra.
    Oracle {
        #[arg(long, value_enum)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 1.0)]
        height: f64,
    },
}

fn env_workers() -> Result<Option<usize>, CliError> {
    match std::env::var("HADAMARD_WORKERS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::validation("HADAMARD_WORKERS", format!("expected a count, got `{v}`")).into()),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Eig { config, count, dump_mesh } => {
            let cfg = commands::load_config(&config)?;
            commands::eig(&cfg, count, dump_mesh.as_deref(), &mut out)
        }
        Command::Predict { config, epsilon, form } => {
            let cfg = commands::load_config(&config)?;
            commands::predict(&cfg, epsilon, form.map(Into::into), &mut out)
        }
        Command::Study { config, form, workers, plot, out: dir } => {
            let cfg = commands::load_config(&config)?;
            let overrides = StudyOverrides {
                form: form.map(Into::into),
                workers: workers.or(env_workers()?),
                plot,
                out_dir: dir,
            };
            commands::study(&cfg, &overrides, &mut out).map(|_| ())
        }
        Command::Oracle { shape, count, width, height } => {
            let shape = match shape {
                ShapeArg::Square => OracleShape::Square,
                ShapeArg::Rectangle => OracleShape::Rectangle,
                ShapeArg::Disk => OracleShape::Disk,
            };
            commands::oracle(shape, count, width, height, &mut out)
        }
    }?;
    out.flush().ok();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).map_err(anyhow::Error::from);
    match result.context("hadamard failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
