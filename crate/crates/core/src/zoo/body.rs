//! Strictly convex bodies and their root-found Funk metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, Scalar};
use crate::metric::{Domain, Evaluate};
use crate::sampling::SampleBox;

/// Catalog of smooth strictly convex shapes, centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Ball {
        radius: f64,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
    /// `sum (x_i / radius)^p < 1` with `p >= 4` even.
    Superellipse {
        p: u32,
        radius: f64,
    },
}

/// `{ phi < 0 }` for a strictly convex level function `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexBody {
    dim: usize,
    shape: Shape,
}

/// Target for `|phi|` at the root-found boundary point.
pub const BOUNDARY_TOL: f64 = 1e-12;

impl ConvexBody {
    pub fn new(dim: usize, shape: Shape) -> Result<Self> {
        if dim == 0 || dim > crate::linalg::MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match &shape {
            Shape::Ball { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                return bad(format!("ball radius {radius} must be positive"))
            }
            Shape::Ellipsoid { semi_axes } => {
                if semi_axes.len() != dim {
                    return bad(format!("ellipsoid needs {dim} semi-axes, got {}", semi_axes.len()));
                }
                if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return bad("ellipsoid semi-axes must be positive".into());
                }
            }
            Shape::Superellipse { p, radius } => {
                if *p < 4 || p % 2 == 1 {
                    return bad(format!("superellipse exponent {p} must be even and >= 4"));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return bad(format!("superellipse radius {radius} must be positive"));
                }
            }
            _ => {}
        }
        Ok(Self { dim, shape })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::new(dim, Shape::Ball { radius: 1.0 }).expect("valid unit ball")
    }

    pub fn ellipsoid(semi_axes: &[f64]) -> Result<Self> {
        Self::new(
            semi_axes.len(),
            Shape::Ellipsoid {
                semi_axes: semi_axes.to_vec(),
            },
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Per-axis half-widths of the bounding box.
    pub fn half_widths(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Ball { radius } | Shape::Superellipse { radius, .. } => vec![*radius; self.dim],
            Shape::Ellipsoid { semi_axes } => semi_axes.clone(),
        }
    }

    pub fn bounding_box(&self) -> SampleBox {
        let h = self.half_widths();
        SampleBox {
            lo: h.iter().map(|v| -v).collect(),
            hi: h,
        }
    }

    /// The bounding box shrunk by `factor` (for interior sampling).
    pub fn inner_box(&self, factor: f64) -> SampleBox {
        let h: Vec<f64> = self.half_widths().iter().map(|v| v * factor).collect();
        SampleBox {
            lo: h.iter().map(|v| -v).collect(),
            hi: h,
        }
    }

    /// Level function, negative inside.
    pub fn phi<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = x[0].constant_like(-1.0);
        for (i, xi) in x.iter().enumerate() {
            let term = match &self.shape {
                Shape::Ball { radius } => xi.square() / (radius * radius),
                Shape::Ellipsoid { semi_axes } => xi.square() / (semi_axes[i] * semi_axes[i]),
                Shape::Superellipse { p, radius } => {
                    let u = xi.clone() / *radius;
                    let mut pow = u.clone();
                    for _ in 1..*p {
                        pow = pow * u.clone();
                    }
                    pow
                }
            };
            acc = acc + term;
        }
        acc
    }

    /// Gradient of [`ConvexBody::phi`].
    pub fn grad_phi<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        x.iter()
            .enumerate()
            .map(|(i, xi)| match &self.shape {
                Shape::Ball { radius } => xi.clone() * (2.0 / (radius * radius)),
                Shape::Ellipsoid { semi_axes } => xi.clone() * (2.0 / (semi_axes[i] * semi_axes[i])),
                Shape::Superellipse { p, radius } => {
                    let u = xi.clone() / *radius;
                    let mut pow = u.clone();
                    for _ in 2..*p {
                        pow = pow * u.clone();
                    }
                    pow * (*p as f64 / radius)
                }
            })
            .collect()
    }

    /// `s > 0` with `phi(x + s * dir) = 0`, for `x` interior.
    ///
    /// Newton from the outside of the convex level function decreases
    /// monotonically to the root; a bisection bracket guards rounding.
    pub fn exit_parameter(&self, x: &[f64], dir: &[f64]) -> Result<f64> {
        let phi0 = self.phi(x);
        if !(phi0 < 0.0) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        let dn = crate::linalg::norm(dir);
        if !(dn > 0.0) {
            return Err(Error::ZeroVector);
        }
        let diag: f64 = self.half_widths().iter().map(|h| 4.0 * h * h).sum::<f64>().sqrt();
        let at = |s: f64| -> Vec<f64> { x.iter().zip(dir).map(|(a, d)| a + s * d).collect() };
        let mut lo = 0.0;
        let mut hi = 2.0 * diag / dn;
        let mut s = hi;
        for _ in 0..300 {
            let p = at(s);
            let val = self.phi(&p);
            if val.abs() <= BOUNDARY_TOL * 1e-2 {
                return Ok(s);
            }
            if val > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let slope: f64 = self.grad_phi(&p).iter().zip(dir).map(|(g, d)| g * d).sum();
            let newton = s - val / slope;
            s = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        let val = self.phi(&at(s));
        if val.abs() <= BOUNDARY_TOL {
            Ok(s)
        } else {
            Err(Error::Numeric(format!(
                "boundary root finding stalled at |phi| = {val:.3e}"
            )))
        }
    }
}

impl Domain for ConvexBody {
    fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.phi(x) < 0.0
    }
    fn level(&self, x: &[f64]) -> f64 {
        self.phi(x)
    }
}

/// Orientation of a Funk metric: `z_+ = x + y / F_+` or `z_- = x - y / F_-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunkSign {
    Plus,
    Minus,
}

impl FunkSign {
    pub fn sign(self) -> f64 {
        match self {
            FunkSign::Plus => 1.0,
            FunkSign::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            FunkSign::Plus => FunkSign::Minus,
            FunkSign::Minus => FunkSign::Plus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FunkSign::Plus => "+",
            FunkSign::Minus => "-",
        }
    }
}

/// `F_±(x, y)` on `body` by boundary root finding.
pub fn funk_general(body: &ConvexBody, x: &[f64], y: &[f64], sign: FunkSign) -> Result<f64> {
    let dir: Vec<f64> = y.iter().map(|c| sign.sign() * c).collect();
    Ok(1.0 / body.exit_parameter(x, &dir)?)
}

/// Jet of `F_±` in the variables carried by `x`, `y`: the base root is found
/// on reals, then Newton steps in the jet ring lift it to full order.
pub fn funk_general_jet(body: &ConvexBody, x: &[Jet], y: &[Jet], sign: FunkSign) -> Result<Jet> {
    let xv: Vec<f64> = x.iter().map(Jet::value).collect();
    let dir: Vec<Jet> = y.iter().map(|c| c.clone() * sign.sign()).collect();
    let dirv: Vec<f64> = dir.iter().map(Jet::value).collect();
    let s0 = body.exit_parameter(&xv, &dirv)?;
    let mut s = x[0].constant_like(s0);
    // Each step doubles the number of correct orders plus one: 0 -> 1 -> 3 -> 7.
    for _ in 0..3 {
        let p: Vec<Jet> = x.iter().zip(&dir).map(|(a, d)| a + &(&s * d)).collect();
        let val = body.phi(&p);
        let grad = body.grad_phi(&p);
        let mut slope = grad[0].clone() * dir[0].clone();
        for (g, d) in grad.iter().zip(&dir).skip(1) {
            slope = slope + g * d;
        }
        s = s - val / slope;
    }
    Ok(s.recip())
}

/// Funk metric of a convex body as an [`Evaluate`] implementation.
#[derive(Debug, Clone)]
pub(crate) struct FunkBody {
    pub body: ConvexBody,
    pub sign: FunkSign,
}

impl Evaluate for FunkBody {
    fn real(&self, x: &[f64], y: &[f64]) -> f64 {
        funk_general(&self.body, x, y, self.sign).unwrap_or(f64::NAN)
    }
    fn jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        funk_general_jet(&self.body, x, y, self.sign).unwrap_or_else(|_| x[0].constant_like(f64::NAN))
    }
}

/// `1/2 (F_- + F_+)` of a convex body.
#[derive(Debug, Clone)]
pub(crate) struct HilbertBody {
    pub body: ConvexBody,
}

impl Evaluate for HilbertBody {
    fn real(&self, x: &[f64], y: &[f64]) -> f64 {
        match (
            funk_general(&self.body, x, y, FunkSign::Minus),
            funk_general(&self.body, x, y, FunkSign::Plus),
        ) {
            (Ok(m), Ok(p)) => 0.5 * (m + p),
            _ => f64::NAN,
        }
    }
    fn jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        match (
            funk_general_jet(&self.body, x, y, FunkSign::Minus),
            funk_general_jet(&self.body, x, y, FunkSign::Plus),
        ) {
            (Ok(m), Ok(p)) => (m + p) * 0.5,
            _ => x[0].constant_like(f64::NAN),
        }
    }
}
