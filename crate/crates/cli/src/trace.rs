use std::io::Write;
use std::path::Path;

use realgit::flows::TraceSample;

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: &str = "t,lambda,speed2,f";

/// CSV text of a trajectory: the header plus one LF-terminated row per
/// sample, every value printed with round-trip precision.
pub fn trace_csv(samples: &[TraceSample]) -> String {
    let mut s = String::with_capacity(32 * (samples.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for x in samples {
        s.push_str(&format!("{:?},{:?},{:?},{:?}\n", x.t, x.lambda, x.speed2, x.f));
    }
    s
}

pub fn export_trace(samples: &[TraceSample], path: &Path) -> CliResult<()> {
    if samples.is_empty() {
        return Err(CliError::Malformed("refusing to export an empty trajectory".into()));
    }
    let write = |e| CliError::Write { path: path.to_path_buf(), source: e };
    let mut file = std::fs::File::create(path).map_err(write)?;
    file.write_all(trace_csv(samples).as_bytes()).map_err(write)?;
    file.flush().map_err(write)
}
