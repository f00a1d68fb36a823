use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TautError {
    #[error("unstable type (g={g}, n={n})")]
    Unstable { g: u32, n: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("edge {0} does not exist")]
    NotAnEdge(usize),
    #[error("type mismatch: {0}")]
    Mismatch(String),
    #[error("class has degree {found}, expected top degree {top}")]
    NotTopDegree { found: u32, top: u32 },
    #[error("truncation order {have} is too small (need {need})")]
    Truncation { have: usize, need: usize },
    #[error("series division left a nonzero remainder: {0}")]
    Remainder(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("table bound exceeded at (g={g}, n={n})")]
    OutOfBound { g: u32, n: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, TautError>;
