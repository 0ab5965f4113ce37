//! Error type shared by every module of the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input data (empty sample sets, non-finite samples, ordering
    /// violations between exponents). The message names the offending sample.
    #[error("input error: {0}")]
    Input(String),

    /// A parameter outside the mathematical domain of an operation
    /// (`m <= n` for eta kernels, exponents below 1 for duals, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two grid functions or fields live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The grid cannot resolve the requested construction.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A partition-of-unity base vanishes where division is required.
    #[error("construction error: {0}")]
    Construction(String),

    /// Invalid run configuration (CLI module).
    #[error("configuration error: {0}")]
    Config(String),

    /// Caller used an operation outside its contract (e.g. the semimodular
    /// with an exponent below 1; the quasi-norm path handles that case).
    #[error("contract error: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
