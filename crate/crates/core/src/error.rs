use thiserror::Error;

/// Errors raised by the stability toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not a member of {kind}: {reason}")]
    NonMember { kind: String, reason: String },
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("element is not in the parabolic subgroup (conjugation growth {growth:.3e})")]
    NotInParabolic { growth: f64 },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("vector is not tangent (normal component {0:.3e})")]
    NotTangent(f64),
    #[error("flow overflowed at t = {t}")]
    Overflow { t: f64 },
    #[error("flow diverges: {0}")]
    Diverged(String),
    #[error("point is not fixed by the direction (|beta_X| = {0:.3e})")]
    NotFixed(f64),
    #[error("iteration budget of {budget} exhausted")]
    BudgetExceeded { budget: usize },
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("point is not semistable: lambda = {lambda:.6e} along a unit direction")]
    NotSemistable { lambda: f64 },
    #[error("directions do not commute (|[alpha, beta]| = {0:.3e})")]
    NotCommuting(f64),
    #[error("commuting Hessian index set is empty: every epsilon is admissible")]
    EmptyIndexSet,
    #[error("classification undecided within budget {budget}: {reason}")]
    Undecided { budget: usize, reason: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
