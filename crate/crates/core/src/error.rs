use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a map or kernel.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition of a bound or estimate does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A query lies outside the region where a certificate is available.
    #[error("region violation: {0}")]
    Region(String),
    /// Malformed configuration text or invalid parameter combination.
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Monte Carlo simulation failed.
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
