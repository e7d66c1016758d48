use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument `{name}` out of domain: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("invalid configuration: {field} {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: &'static str,
    },
    #[error("static channel model selected but no static coefficients were supplied")]
    MissingStaticCoefficients,
    #[error("quadrature did not converge for {what}")]
    NonConvergence { what: &'static str },
    #[error("result of {what} overflows f64")]
    Overflow { what: &'static str },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64) -> Error {
    Error::Domain { name, value }
}

pub(crate) fn invalid(field: &'static str, reason: &'static str) -> Error {
    Error::InvalidConfig { field, reason }
}
