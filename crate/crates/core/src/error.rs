use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("matrix is not Hermitian (relative residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("empty Kraus operator list")]
    EmptyKraus,

    #[error("{what} = {value} outside valid range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("process matrix fails {check}: residual {residual:.3e}")]
    InvalidProcess { check: &'static str, residual: f64 },

    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    SolverStalled { iterations: usize, residual: f64 },

    #[error("index grids do not match: {0}")]
    GridMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("schema error: {0}")]
    Schema(String),
}
