use thiserror::Error;

/// Errors raised by geometry construction, operators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two radial functions (or a function and an operator) live on different grids.
    #[error("grid mismatch: {0}")]
    Shape(String),
    /// The start vector vanished after projecting off the deflation basis.
    #[error("degenerate start vector: {0}")]
    DegenerateStart(String),
    /// A computed result violates an invariant it must satisfy.
    #[error("internal consistency violated: {0}")]
    Consistency(String),
    /// Malformed external input (tabulated warping CSV, config file).
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
