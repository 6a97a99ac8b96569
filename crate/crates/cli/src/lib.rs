//! Scenario runner for the `realgit` library: JSON scenarios in, JSON or CSV
//! reports out, flow traces as CSV.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;
pub mod trace;
pub mod verify;

use std::path::Path;

pub use commands::{run, Outcome};
pub use error::{CliError, CliResult};
pub use report::{Report, ReportFormat};
pub use scenario::{load_scenario, parse_scenario, Command, EffectiveParams, Params, Scenario};
pub use trace::export_trace;

/// Load, run and render a scenario, writing the trace when asked.
/// A failed verify suite still yields its rendered report.
pub fn run_scenario(path: &Path, overrides: &Params, format: ReportFormat, trace_path: Option<&Path>) -> CliResult<(String, Option<CliError>)> {
    let scenario = load_scenario(path)?;
    let outcome = run(&scenario, overrides)?;
    if let Some(tp) = trace_path {
        match &outcome.trace {
            Some(samples) => export_trace(samples, tp)?,
            None => return Err(CliError::Malformed("a trace needs both a point and a direction".into())),
        }
    }
    let text = outcome.report.render(format);
    Ok((text, outcome.failure.map(CliError::VerifyFailed)))
}
