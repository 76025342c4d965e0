//! Command line front end for the solver: reads a problem document, runs
//! the requested computation, prints a deterministic JSON report, and maps
//! the verdict onto the exit code.
//!
//! Exit codes: 0 when the command succeeds and any check it performs
//! passes, 2 when the command runs but its check fails, 1 when a document
//! cannot be parsed or the solver fails outright.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use mayer_cli::commands::{self, CommandOutput};
use mayer_cli::error::CliError;

#[derive(Parser)]
#[command(name = "mayer", version, about = "Primal-dual solver and certificate checker for Mayer problems over higher order differential inclusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the discretized primal problem and report the trajectory.
    SolvePrimal {
        /// Problem document (JSON).
        file: PathBuf,
        /// Number of grid steps; overrides the document setting.
        #[arg(long)]
        grid: Option<usize>,
        /// Write the report here, plus <stem>.trajectory.csv alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the discretized dual problem and report the adjoint arc.
    SolveDual {
        /// Problem document (JSON).
        file: PathBuf,
        /// Number of grid steps; overrides the document setting.
        #[arg(long)]
        grid: Option<usize>,
        /// Write the report here, plus <stem>.dual.json and
        /// <stem>.adjoint.csv alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve both sides and report the duality gap, with a gap-versus-grid
    /// table on a fixed ladder of resolutions.
    Gap {
        /// Problem document (JSON).
        file: PathBuf,
        /// Number of grid steps for the headline figures.
        #[arg(long)]
        grid: Option<usize>,
        /// Relative gap tolerance for the verdict.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here, plus <stem>.gap.csv alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the optimality certificate for a solved primal-dual pair.
    Certify {
        /// Problem document (JSON).
        file: PathBuf,
        /// Number of grid steps; must agree with --dual-in when both are
        /// given.
        #[arg(long)]
        grid: Option<usize>,
        /// Certificate tolerance; defaults to the grid-scaled value.
        #[arg(long)]
        tol: Option<f64>,
        /// Dual document to check instead of the extracted multipliers.
        #[arg(long)]
        dual_in: Option<PathBuf>,
        /// Write the report here, plus <stem>.certificate.csv and
        /// <stem>.dual.json alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the adjoint system for the instance in symbolic form.
    Adjoint {
        /// Problem document (JSON).
        file: PathBuf,
        /// Write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the pivoting solver against vertex enumeration on the
    /// transcribed program.
    Oracle {
        /// Problem document (JSON).
        file: PathBuf,
        /// Number of grid steps; defaults to 2 because enumeration only
        /// scales to coarse grids.
        #[arg(long)]
        grid: Option<usize>,
        /// Write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<CommandOutput, CliError> {
    match cli.command {
        Command::SolvePrimal { file, grid, out } => {
            commands::run_solve_primal(&file, grid, out.as_deref())
        }
        Command::SolveDual { file, grid, out } => {
            commands::run_solve_dual(&file, grid, out.as_deref())
        }
        Command::Gap { file, grid, tol, out } => {
            commands::run_gap(&file, grid, tol, out.as_deref())
        }
        Command::Certify { file, grid, tol, dual_in, out } => {
            commands::run_certify(&file, grid, tol, dual_in.as_deref(), out.as_deref())
        }
        Command::Adjoint { file, out } => commands::run_adjoint(&file, out.as_deref()),
        Command::Oracle { file, grid, out } => {
            commands::run_oracle(&file, grid, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(output) => {
            print!("{}", output.report);
            for (path, content) in &output.files {
                if let Err(e) = fs::write(path, content) {
                    eprintln!("error: io: {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(if output.pass { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
