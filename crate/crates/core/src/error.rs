use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant to an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A requested size exceeds a configured enumeration or compute guard.
    #[error("size guard exceeded: {what} (limit {limit}, requested {requested})")]
    Guard {
        what: &'static str,
        limit: u64,
        requested: u64,
    },
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to reach its tolerance.
    #[error("no convergence: {0}")]
    Convergence(String),
    /// Odd orders vanish under Gaussian averaging over the couplings.
    #[error("odd order {0} vanishes")]
    OddOrder(usize),
    /// A textual key or record could not be decoded.
    #[error("parse error: {0}")]
    Parse(String),
    /// A structural invariant was violated; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
