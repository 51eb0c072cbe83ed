use crate::jets::JetError;
use crate::linalg::MAX_DIM;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {0} outside 1..={MAX_DIM}")]
    UnsupportedDimension(usize),
    #[error("point {0:?} lies outside the metric domain")]
    OutsideDomain(Vec<f64>),
    #[error("tangent vector is zero or non-finite")]
    ZeroVector,
    #[error("metric value {0} is not positive and finite")]
    NonPositive(f64),
    #[error("fundamental tensor is not a Minkowski inner product (condition number {condition:.3e})")]
    NonMinkowski { condition: f64 },
    #[error("flag vector is parallel to the flagpole (g-angle {angle:.3e})")]
    DegenerateFlag { angle: f64 },
    #[error("metrics are not projectively related (spray defect {defect:.3e})")]
    NotProjectivelyRelated { defect: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
