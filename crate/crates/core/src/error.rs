use thiserror::Error;

use crate::ratseries::Space;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("space mismatch: expected {expected:?}, found {found:?}")]
    SpaceMismatch { expected: Space, found: Space },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular evaluation: {0}")]
    SingularEvaluation(String),

    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("convention error: {0}")]
    Convention(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("hbar grading violated: term carries hbar^{0}")]
    GradingViolation(i32),

    #[error("degenerate recurrence factor at (m={m}, n={n})")]
    Degenerate { m: u32, n: u32 },

    #[error("path from q={q} to x={x} is classically inaccessible")]
    Unreachable { q: f64, x: f64 },

    #[error("quadrature did not converge within {0} subdivisions")]
    Budget(usize),

    #[error("math domain error: {0}")]
    MathDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
