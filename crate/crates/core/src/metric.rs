//! Chart-local Finsler metrics.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{seed_variables, Jet, Scalar};
use crate::linalg::{norm, MAX_DIM};
use crate::sampling::SampleBox;

/// A metric formula written once over any [`Scalar`] ring.
pub trait MetricFunction: Send + Sync {
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S;
}

/// Object-safe evaluation on reals and on jets.
///
/// Every [`MetricFunction`] implements this; metrics that are not a single
/// closed formula (root-found Funk metrics, for instance) implement it
/// directly.
pub trait Evaluate: Send + Sync {
    fn real(&self, x: &[f64], y: &[f64]) -> f64;
    fn jet(&self, x: &[Jet], y: &[Jet]) -> Jet;
}

impl<T: MetricFunction> Evaluate for T {
    fn real(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval(x, y)
    }
    fn jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        self.eval(x, y)
    }
}

/// Open set on which a metric is defined.
pub trait Domain: Send + Sync {
    fn contains(&self, x: &[f64]) -> bool;
    /// Negative inside, positive outside; only the sign is exact.
    fn level(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct WholeSpace;

impl Domain for WholeSpace {
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
    }
    fn level(&self, _x: &[f64]) -> f64 {
        -1.0
    }
}

/// Immutable Finsler metric with its domain and metadata.
#[derive(Clone)]
pub struct FinslerMetric {
    name: String,
    dim: usize,
    reversible: bool,
    einstein_constant: Option<f64>,
    sample_box: SampleBox,
    func: Arc<dyn Evaluate>,
    domain: Arc<dyn Domain>,
}

impl fmt::Debug for FinslerMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinslerMetric")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("reversible", &self.reversible)
            .field("einstein_constant", &self.einstein_constant)
            .finish_non_exhaustive()
    }
}

impl FinslerMetric {
    /// Metric on all of `R^dim`, non-reversible and without a known Einstein
    /// constant until declared otherwise.
    pub fn new(name: impl Into<String>, dim: usize, func: impl Evaluate + 'static) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self {
            name: name.into(),
            dim,
            reversible: false,
            einstein_constant: None,
            sample_box: SampleBox::cube(dim, -1.0, 1.0),
            func: Arc::new(func),
            domain: Arc::new(WholeSpace),
        })
    }

    pub fn with_domain(mut self, domain: impl Domain + 'static) -> Self {
        self.domain = Arc::new(domain);
        self
    }

    pub fn with_reversible(mut self, reversible: bool) -> Self {
        self.reversible = reversible;
        self
    }

    pub fn with_einstein_constant(mut self, lambda: Option<f64>) -> Self {
        self.einstein_constant = lambda;
        self
    }

    pub fn with_sample_box(mut self, bbox: SampleBox) -> Self {
        assert_eq!(bbox.dim(), self.dim, "sample box dimension");
        self.sample_box = bbox;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `c * F`; the Einstein constant scales by `1 / c^2`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor {c} must be positive")));
        }
        let mut out = self.clone();
        out.func = Arc::new(Scaled {
            inner: self.func.clone(),
            c,
        });
        out.einstein_constant = self.einstein_constant.map(|l| l / (c * c));
        out.name = format!("{c}*{}", self.name);
        Ok(out)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn reversible(&self) -> bool {
        self.reversible
    }

    pub fn einstein_constant(&self) -> Option<f64> {
        self.einstein_constant
    }

    pub fn sample_box(&self) -> &SampleBox {
        &self.sample_box
    }

    pub fn domain(&self) -> &dyn Domain {
        self.domain.as_ref()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.domain.contains(x)
    }

    /// Validates dimensions, domain membership and `y != 0`.
    pub fn check_point(&self, x: &[f64], y: &[f64]) -> Result<()> {
        for v in [x, y] {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        let ny = norm(y);
        if !(ny > 1e-12) || !ny.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(())
    }

    /// `F(x, y)` with argument and positivity checks.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x, y)?;
        let v = self.func.real(x, y);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonPositive(v))
        }
    }

    /// `F(x, y)` without checks.
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.func.real(x, y)
    }

    /// The underlying evaluator, usable as a scalar function on `TM`.
    pub fn function(&self) -> &dyn Evaluate {
        self.func.as_ref()
    }

    pub fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        self.func.jet(x, y)
    }

    /// Jet of `F` at `(x, y)` in the `2n` seeded variables.
    pub fn jet_at(&self, x: &[f64], y: &[f64], order: usize) -> Result<Jet> {
        self.check_point(x, y)?;
        let vars = seed_variables(x, y, order)?;
        let (xs, ys) = vars.split_at(self.dim);
        let f = self.func.jet(xs, ys);
        if f.value() > 0.0 && f.coeffs().iter().all(|c| c.is_finite()) {
            Ok(f)
        } else {
            Err(Error::NonPositive(f.value()))
        }
    }
}

struct Scaled {
    inner: Arc<dyn Evaluate>,
    c: f64,
}

impl Evaluate for Scaled {
    fn real(&self, x: &[f64], y: &[f64]) -> f64 {
        self.c * self.inner.real(x, y)
    }
    fn jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        self.inner.jet(x, y) * self.c
    }
}

/// Adapts a closure `(x, y) -> F` over `f64` and [`Jet`] pairs.
pub struct FnMetric<R, J> {
    real: R,
    jet: J,
}

impl<R, J> FnMetric<R, J>
where
    R: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
    J: Fn(&[Jet], &[Jet]) -> Jet + Send + Sync,
{
    pub fn new(real: R, jet: J) -> Self {
        Self { real, jet }
    }
}

impl<R, J> Evaluate for FnMetric<R, J>
where
    R: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
    J: Fn(&[Jet], &[Jet]) -> Jet + Send + Sync,
{
    fn real(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.real)(x, y)
    }
    fn jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        (self.jet)(x, y)
    }
}
