use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use realgit_cli::{run_scenario, Params, ReportFormat};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Run a scenario file and print its report.
#[derive(Debug, Parser)]
#[command(name = "realgit", version)]
struct Args {
    /// Scenario JSON file.
    scenario: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sweep points for stratify.
    #[arg(long)]
    sweep: Option<usize>,
    /// Write the sampled beta-flow as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    report: Format,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let overrides = Params { tol: args.tol, t_max: args.t_max, budget: args.budget, seed: args.seed, sweep: args.sweep, steps: None };
    let format = match args.report {
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    match run_scenario(&args.scenario, &overrides, format, args.trace.as_deref()) {
        Ok((text, failure)) => {
            print!("{text}");
            match failure {
                Some(e) => {
                    eprintln!("realgit: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("realgit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
