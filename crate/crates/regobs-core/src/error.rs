//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by basis construction, sensor evaluation, and the
/// observability solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("invalid sensor: {0}")]
    InvalidSensor(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("invalid control: {0}")]
    InvalidControl(String),

    #[error("mismatched operands: {0}")]
    Mismatch(String),

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// The linear system does not pin down a solution (singular Gramian and
    /// no regularization, a fully blind sensor suite, an empty kernel query).
    #[error("underdetermined: {0}")]
    Underdetermined(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
