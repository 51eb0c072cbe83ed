use std::fmt;
use std::process::ExitCode;

use finsler_core::Error;

/// Process outcome other than success, one per documented exit code.
#[derive(Debug)]
pub enum Failure {
    /// A checked property is violated (exit 1).
    Assertion(String),
    /// Bad flags, config or metric name (exit 2).
    Usage(String),
    /// Singular tensor, step underflow or other numeric breakdown (exit 3).
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Assertion(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Assertion(m) => write!(f, "assertion failed: {m}"),
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch { .. }
            | Error::UnsupportedDimension(_)
            | Error::OutsideDomain(_)
            | Error::ZeroVector
            | Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            Error::NotProjectivelyRelated { .. } => Failure::Assertion(e.to_string()),
            Error::NonPositive(_)
            | Error::NonMinkowski { .. }
            | Error::DegenerateFlag { .. }
            | Error::Numeric(_)
            | Error::Jet(_) => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o: {e}"))
    }
}
