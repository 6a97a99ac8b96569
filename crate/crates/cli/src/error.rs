use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Core(#[from] realgit::Error),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 1 for malformed input, 2 for exhausted budgets and undecided
    /// verdicts, 3 for numeric and write failures.
    pub fn exit_code(&self) -> i32 {
        use realgit::Error as E;
        match self {
            CliError::Malformed(_) => 1,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::InvalidPoint(_) | E::NonMember { .. } | E::ZeroDirection | E::NotTangent(_) | E::NotFixed(_) | E::NotCommuting(_) => 1,
                E::BudgetExceeded { .. } | E::Undecided { .. } => 2,
                _ => 3,
            },
            CliError::Write { .. } | CliError::VerifyFailed(_) => 3,
        }
    }
}
