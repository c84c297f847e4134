//! Batch front-end: `adlab run <scenario.json>` executes one scenario and
//! writes its artifacts; `adlab sweep <scenario.json> --param T --values ...`
//! fans a parameter sweep out across isolated subdirectories.
//!
//! Exit codes: 0 success, 1 I/O or configuration errors, 2 when a
//! physics-contract violation was recorded (details in summary.json).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use adlab::runner;
use adlab::scenario::SweepParam;
use adlab::Error;

#[derive(Parser)]
#[command(name = "adlab", about = "Driven quantum systems and their inverse-evolving duals", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file
    Run {
        /// Scenario JSON file
        scenario: PathBuf,
        /// Output directory (overrides the scenario's out_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid-point count override
        #[arg(long)]
        grid: Option<usize>,
        /// Suppress the verdict line on stdout
        #[arg(long)]
        quiet: bool,
    },
    /// Run the scenario once per parameter value
    Sweep {
        /// Scenario JSON file
        scenario: PathBuf,
        /// Parameter to sweep: T, omega0, grid_points, or theta_exponent
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Output directory (overrides the scenario's out_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress per-run lines on stdout
        #[arg(long)]
        quiet: bool,
    },
}

fn error_exit(e: &Error) -> u8 {
    if e.is_physics() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is not an error
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    match cli.command {
        Command::Run { scenario, out, grid, quiet } => {
            match runner::run_file(&scenario, out.as_deref(), grid) {
                Ok(report) => {
                    if !quiet {
                        println!(
                            "wrote {} ({} condition report(s), {} error(s))",
                            report.out_dir.join("summary.json").display(),
                            report.summary.conditions.len(),
                            report.summary.errors.len()
                        );
                        for rep in &report.summary.conditions {
                            println!(
                                "  {}: margin {:.6e} -> {:?}",
                                rep.condition, rep.margin, rep.verdict
                            );
                        }
                        for err in &report.summary.errors {
                            println!("  error: {err}");
                        }
                    }
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(error_exit(&e))
                }
            }
        }
        Command::Sweep { scenario, param, values, out, quiet } => {
            let param = match SweepParam::parse(&param) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match runner::sweep_file(&scenario, param, &values, out.as_deref()) {
                Ok(report) => {
                    if !quiet {
                        println!("wrote {}", report.out_dir.join("sweep.csv").display());
                        for row in &report.rows {
                            println!(
                                "  {} = {}: {} error(s)",
                                param.name(),
                                row.value,
                                row.errors
                            );
                        }
                    }
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(error_exit(&e))
                }
            }
        }
    }
}
