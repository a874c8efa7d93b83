//! `debtdyn` command-line interface.
//!
//! Exit codes: 0 on success, 1 on parse/validation errors, 2 on arithmetic or
//! domain errors. Data goes to the output stream (or `--output`) only after
//! every computation succeeded; diagnostics go to the error stream.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::error::Error;
use crate::io::{
    build_result_table, emit_results, emit_sensitivity, emit_sweep, emit_threshold, read_scenario_file, Metadata,
    OutputFormat, ParsedScenario, ScenarioFileError, Units,
};
use crate::linear::PropagationConvention;
use crate::sensitivity::{eta_grid, eta_sweep, sensitivity_matrix, threshold_report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_ARITHMETIC: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "debtdyn",
    version,
    about = "Debt-to-GDP dynamics under fiscal-multiplier feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Display units (defaults to the scenario file's units)
    #[arg(long, global = true, value_enum)]
    units: Option<Units>,

    /// Deviation propagation factor (overrides the scenario file)
    #[arg(long, global = true)]
    convention: Option<PropagationConvention>,

    /// Write data here instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Round displayed values to this many decimals
    #[arg(long, global = true)]
    round: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Nominal and perturbed trajectories from both engines
    Simulate { file: PathBuf },
    /// First-order unit-shock coefficients
    Sensitivity {
        file: PathBuf,
        /// Only report observation period T
        #[arg(long, value_name = "T")]
        at: Option<usize>,
    },
    /// Per-period break-even classification
    Threshold { file: PathBuf },
    /// Evaluate both engines over a multiplier grid
    Sweep {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        eta_from: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta_to: f64,
        #[arg(long)]
        eta_steps: usize,
        /// Observation period (defaults to the horizon)
        #[arg(long, value_name = "T")]
        at: Option<usize>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Input(#[from] ScenarioFileError),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(e) if e.is_arithmetic() => EXIT_ARITHMETIC,
            _ => EXIT_INPUT,
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let rendered = err.render().to_string();
            return if err.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
                EXIT_INPUT
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok(document) => match write_output(cli.output.as_deref(), &document, stdout) {
            Ok(()) => EXIT_OK,
            Err(err) => report(&err, stderr),
        },
        Err(err) => report(&err, stderr),
    }
}

fn report(err: &CliError, stderr: &mut dyn Write) -> u8 {
    let _ = writeln!(stderr, "error: {err}");
    err.exit_code()
}

fn write_output(path: Option<&Path>, document: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, document).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        }),
        None => stdout
            .write_all(document.as_bytes())
            .and_then(|()| stdout.flush())
            .map_err(|source| CliError::Output {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn load(cli: &Cli, file: &Path) -> Result<(ParsedScenario, Units), CliError> {
    let mut parsed = read_scenario_file(file)?;
    if let Some(conv) = cli.convention {
        parsed.convention = conv;
    }
    let units = cli.units.unwrap_or(parsed.units);
    Ok((parsed, units))
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Simulate { file } => {
            let (parsed, units) = load(cli, file)?;
            let table = build_result_table(&parsed, units)?;
            Ok(emit_results(&table, cli.format, cli.round))
        }
        Command::Sensitivity { file, at } => {
            let (parsed, units) = load(cli, file)?;
            let horizon = parsed.scenario.horizon;
            if let Some(t) = *at {
                if t == 0 || t > horizon {
                    return Err(Error::ObservationOutOfRange { t, horizon }.into());
                }
            }
            let matrix = sensitivity_matrix(&parsed.scenario, parsed.multiplier, parsed.convention)?;
            let metadata = Metadata::new(&parsed, units);
            Ok(emit_sensitivity(&matrix, *at, &metadata, cli.format, cli.round))
        }
        Command::Threshold { file } => {
            let (parsed, units) = load(cli, file)?;
            let report = threshold_report(&parsed.scenario, parsed.multiplier)?;
            let metadata = Metadata::new(&parsed, units);
            Ok(emit_threshold(&report, &metadata, cli.format, cli.round))
        }
        Command::Sweep {
            file,
            eta_from,
            eta_to,
            eta_steps,
            at,
        } => {
            let (parsed, units) = load(cli, file)?;
            let t_obs = at.unwrap_or(parsed.scenario.horizon);
            let etas = eta_grid(*eta_from, *eta_to, *eta_steps);
            let records = eta_sweep(&parsed.scenario, &parsed.perturbations, &etas, parsed.convention, t_obs)?;
            let metadata = Metadata::new(&parsed, units);
            Ok(emit_sweep(&records, &metadata, cli.format, cli.round))
        }
    }
}
