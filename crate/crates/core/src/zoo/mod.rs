//! Closed-form and root-found metrics with known curvature.

mod body;
mod evolution;

use crate::error::{Error, Result};
use crate::jets::{dot, norm_sq, Scalar};
use crate::metric::{Domain, FinslerMetric, MetricFunction};
use crate::sampling::SampleBox;

pub use body::{funk_general, funk_general_jet, ConvexBody, FunkSign, Shape, BOUNDARY_TOL};
pub use evolution::{evolution_coefficients, verify_evolution, EvolutionCoefficients, EvolutionLaw, EvolutionSource};

/// Interior sampling box of the unit ball.
fn ball_box(n: usize) -> SampleBox {
    SampleBox::cube(n, -0.6, 0.6)
}

/// `|x|^2 |y|^2 - <x, y>^2`.
fn wedge_sq<S: Scalar>(x: &[S], y: &[S]) -> S {
    let xy = dot(x, y);
    norm_sq(x) * norm_sq(y) - xy.square()
}

struct Euclidean;

impl MetricFunction for Euclidean {
    fn eval<S: Scalar>(&self, _x: &[S], y: &[S]) -> S {
        norm_sq(y).sqrt()
    }
}

pub fn euclidean(n: usize) -> Result<FinslerMetric> {
    Ok(FinslerMetric::new("euclidean", n, Euclidean)?
        .with_reversible(true)
        .with_einstein_constant(Some(0.0)))
}

struct Klein;

impl MetricFunction for Klein {
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let root = (norm_sq(y) - wedge_sq(x, y)).sqrt();
        root / (-norm_sq(x) + 1.0)
    }
}

pub fn klein(n: usize) -> Result<FinslerMetric> {
    Ok(FinslerMetric::new("klein", n, Klein)?
        .with_domain(ConvexBody::unit_ball(n))
        .with_reversible(true)
        .with_einstein_constant(Some(-1.0))
        .with_sample_box(ball_box(n)))
}

struct FunkBall {
    sign: f64,
}

impl MetricFunction for FunkBall {
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let root = (norm_sq(y) - wedge_sq(x, y)).sqrt();
        (root + dot(x, y) * self.sign) / (-norm_sq(x) + 1.0)
    }
}

/// Funk metric of the unit ball in closed form.
pub fn funk_ball(n: usize, sign: FunkSign) -> Result<FinslerMetric> {
    Ok(
        FinslerMetric::new(format!("funk{}", sign.label()), n, FunkBall { sign: sign.sign() })?
            .with_domain(ConvexBody::unit_ball(n))
            .with_einstein_constant(Some(-0.25))
            .with_sample_box(ball_box(n)),
    )
}

struct HilbertBall;

impl MetricFunction for HilbertBall {
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        (FunkBall { sign: 1.0 }.eval(x, y) + FunkBall { sign: -1.0 }.eval(x, y)) * 0.5
    }
}

/// `1/2 (F_- + F_+)` of the unit ball, assembled from the closed-form Funk pair.
pub fn hilbert_ball(n: usize) -> Result<FinslerMetric> {
    Ok(FinslerMetric::new("hilbert-ball", n, HilbertBall)?
        .with_domain(ConvexBody::unit_ball(n))
        .with_reversible(true)
        .with_einstein_constant(Some(-1.0))
        .with_sample_box(ball_box(n)))
}

struct Spherical;

impl MetricFunction for Spherical {
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        (norm_sq(y) + wedge_sq(x, y)).sqrt() / (norm_sq(x) + 1.0)
    }
}

pub fn spherical(n: usize) -> Result<FinslerMetric> {
    Ok(FinslerMetric::new("spherical", n, Spherical)?
        .with_reversible(true)
        .with_einstein_constant(Some(1.0))
        .with_sample_box(SampleBox::cube(n, -2.0, 2.0)))
}

struct Bryant {
    eps: f64,
}

impl MetricFunction for Bryant {
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let e = self.eps;
        let x2 = norm_sq(x);
        let y2 = norm_sq(y);
        let xy = dot(x, y);
        let w = wedge_sq(x, y);
        let den = x2.square() + x2.clone() * (2.0 * e) + 1.0;
        let a = w.clone() + y2.clone() * e + xy.square() * (2.0 * (1.0 - e * e)) / den.clone();
        let b = w.square() + w * y2.clone() * (2.0 * e) + y2.square();
        ((a + b.sqrt()) / (den.clone() * 2.0)).sqrt() + xy * (1.0 - e * e).sqrt() / den
    }
}

/// Deformation of the spherical metric with parameter `0 < eps <= 1`.
pub fn bryant(n: usize, eps: f64) -> Result<FinslerMetric> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bryant parameter {eps} outside (0, 1]"
        )));
    }
    Ok(FinslerMetric::new(format!("bryant({eps})"), n, Bryant { eps })?
        .with_reversible(eps == 1.0)
        .with_sample_box(SampleBox::cube(n, -2.0, 2.0)))
}

/// `x^n > sum_{a<n} (x^a)^2`.
#[derive(Debug, Clone, Copy)]
pub struct ParaboloidDomain;

impl ParaboloidDomain {
    fn height<S: Scalar>(x: &[S]) -> S {
        let n = x.len();
        let mut h = x[n - 1].clone();
        for xa in &x[..n - 1] {
            h = h - xa.square();
        }
        h
    }
}

impl Domain for ParaboloidDomain {
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite()) && Self::height(x) > 0.0
    }
    fn level(&self, x: &[f64]) -> f64 {
        -Self::height(x)
    }
}

struct Paraboloid;

impl MetricFunction for Paraboloid {
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let n = x.len();
        let h = ParaboloidDomain::height(x);
        let mut lin = y[n - 1].clone();
        let mut ya2 = y[0].constant_like(0.0);
        for a in 0..n - 1 {
            lin = lin - x[a].clone() * y[a].clone() * 2.0;
            ya2 = ya2 + y[a].square();
        }
        (lin.square() + h.clone() * ya2 * 4.0).sqrt() / (h * 2.0)
    }
}

/// Riemannian metric of constant curvature -1 above the paraboloid
/// `x^n = sum_{a<n} (x^a)^2`.
pub fn paraboloid(n: usize) -> Result<FinslerMetric> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut lo = vec![-0.8; n];
    let mut hi = vec![0.8; n];
    lo[n - 1] = 0.1;
    hi[n - 1] = 1.5;
    Ok(FinslerMetric::new("paraboloid", n, Paraboloid)?
        .with_domain(ParaboloidDomain)
        .with_reversible(true)
        .with_einstein_constant(Some(-1.0))
        .with_sample_box(SampleBox { lo, hi }))
}

/// Funk metric of an arbitrary convex body.
pub fn funk(body: &ConvexBody, sign: FunkSign) -> Result<FinslerMetric> {
    let n = body.dim();
    Ok(FinslerMetric::new(
        format!("funk{}-body", sign.label()),
        n,
        body::FunkBody {
            body: body.clone(),
            sign,
        },
    )?
    .with_domain(body.clone())
    .with_einstein_constant(Some(-0.25))
    .with_sample_box(body.inner_box(0.6)))
}

/// Hilbert metric of an arbitrary convex body.
pub fn hilbert_general(body: &ConvexBody) -> Result<FinslerMetric> {
    let n = body.dim();
    Ok(
        FinslerMetric::new("hilbert-body", n, body::HilbertBody { body: body.clone() })?
            .with_domain(body.clone())
            .with_reversible(true)
            .with_einstein_constant(Some(-1.0))
            .with_sample_box(body.inner_box(0.6)),
    )
}

/// Zoo metric by name: `euclidean`, `klein`, `funk+`, `funk-`, `half-funk+`,
/// `half-funk-`, `hilbert-ball`, `spherical`, `bryant`, `paraboloid`,
/// `funk+-body`, `funk--body`, `hilbert-body` (the last three need `body`).
pub fn by_name(name: &str, n: usize, eps: f64, body: Option<&ConvexBody>) -> Result<FinslerMetric> {
    let need_body = || {
        body.cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("metric {name} needs a convex body")))
    };
    match name {
        "euclidean" => euclidean(n),
        "klein" => klein(n),
        "funk+" | "funk-plus" => funk_ball(n, FunkSign::Plus),
        "funk-" | "funk-minus" => funk_ball(n, FunkSign::Minus),
        "half-funk+" => funk_ball(n, FunkSign::Plus)?.scaled(0.5),
        "half-funk-" => funk_ball(n, FunkSign::Minus)?.scaled(0.5),
        "hilbert-ball" | "hilbert" => hilbert_ball(n),
        "spherical" => spherical(n),
        "bryant" => bryant(n, eps),
        "paraboloid" => paraboloid(n),
        "funk+-body" => funk(&need_body()?, FunkSign::Plus),
        "funk--body" => funk(&need_body()?, FunkSign::Minus),
        "hilbert-body" => hilbert_general(&need_body()?),
        other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
    }
}

/// Names accepted by [`by_name`].
pub const METRIC_NAMES: &[&str] = &[
    "euclidean",
    "klein",
    "funk+",
    "funk-",
    "half-funk+",
    "half-funk-",
    "hilbert-ball",
    "spherical",
    "bryant",
    "paraboloid",
    "funk+-body",
    "funk--body",
    "hilbert-body",
];
