//! Numerical Finsler geometry on open subsets of `R^n`.
//!
//! Metrics are written once against the [`jets::Scalar`] ring and evaluated on
//! truncated Taylor jets, which gives exact derivatives for the fundamental
//! tensor, the spray, the Riemann curvature and the projective quantities.

pub mod acceptance;
pub mod comparison;
pub mod error;
pub mod geometry;
pub mod jets;
pub mod linalg;
pub mod metric;
pub mod ode;
pub mod projective;
pub mod quadrature;
pub mod sampling;
pub mod zoo;

pub use error::{Error, Result};
pub use jets::{Jet, Scalar};
pub use metric::{Domain, Evaluate, FinslerMetric, MetricFunction};
