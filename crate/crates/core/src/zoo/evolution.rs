//! Evolution of a projectively flat metric along Euclidean unit-speed lines.

use serde::Serialize;

use super::{bryant, funk, funk_ball, hilbert_ball, hilbert_general, klein, paraboloid, spherical};
use super::{ConvexBody, FunkSign};
use crate::error::{Error, Result};
use crate::jets::{dot, norm_sq};
use crate::metric::FinslerMetric;

/// Metric whose restriction to lines `x + t y` is tracked. `body: None`
/// selects the closed-form unit-ball metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum EvolutionSource {
    Spherical { dim: usize },
    Klein { dim: usize },
    FunkPlus { dim: usize, body: Option<ConvexBody> },
    FunkMinus { dim: usize, body: Option<ConvexBody> },
    Hilbert { dim: usize, body: Option<ConvexBody> },
    Paraboloid { dim: usize },
    Bryant { dim: usize, eps: f64 },
}

/// Shape of `F~(c'(t))` for a pair with `lambda = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionLaw {
    /// `1 / ((a + b t)^2 + (t / a)^2)`, target curvature +1.
    Elliptic,
    /// `1 / ((a + b t)^2 - (t / a)^2)`, target curvature -1.
    Hyperbolic,
}

impl EvolutionLaw {
    pub fn value(self, a: f64, b: f64, t: f64) -> f64 {
        let lin = a + b * t;
        let q = t / a;
        match self {
            EvolutionLaw::Elliptic => 1.0 / (lin * lin + q * q),
            EvolutionLaw::Hyperbolic => 1.0 / (lin * lin - q * q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionCoefficients {
    pub a: f64,
    pub b: f64,
    pub source: &'static str,
    pub law: EvolutionLaw,
    /// The evolving metric is `scale * law`; Funk metrics evolve as `2 * law`.
    pub scale: f64,
}

impl EvolutionCoefficients {
    /// Predicted `F~(x + t y, y)`.
    pub fn predict(&self, t: f64) -> f64 {
        self.scale * self.law.value(self.a, self.b, t)
    }
}

impl EvolutionSource {
    pub fn tag(&self) -> &'static str {
        match self {
            EvolutionSource::Spherical { .. } => "spherical",
            EvolutionSource::Klein { .. } => "klein",
            EvolutionSource::FunkPlus { .. } => "funk_plus",
            EvolutionSource::FunkMinus { .. } => "funk_minus",
            EvolutionSource::Hilbert { .. } => "hilbert",
            EvolutionSource::Paraboloid { .. } => "paraboloid",
            EvolutionSource::Bryant { .. } => "bryant",
        }
    }

    /// The evolving metric `F~`.
    pub fn metric(&self) -> Result<FinslerMetric> {
        let funk_of = |dim: usize, body: &Option<ConvexBody>, sign| match body {
            None => funk_ball(dim, sign),
            Some(b) => funk(b, sign),
        };
        match self {
            EvolutionSource::Spherical { dim } => spherical(*dim),
            EvolutionSource::Klein { dim } => klein(*dim),
            EvolutionSource::FunkPlus { dim, body } => funk_of(*dim, body, FunkSign::Plus),
            EvolutionSource::FunkMinus { dim, body } => funk_of(*dim, body, FunkSign::Minus),
            EvolutionSource::Hilbert { dim, body } => match body {
                None => hilbert_ball(*dim),
                Some(b) => hilbert_general(b),
            },
            EvolutionSource::Paraboloid { dim } => paraboloid(*dim),
            EvolutionSource::Bryant { dim, eps } => bryant(*dim, *eps),
        }
    }
}

/// `(a, b)` of the evolution law along `x + t y` for a Euclidean-unit `y`.
pub fn evolution_coefficients(source: &EvolutionSource, x: &[f64], y: &[f64]) -> Result<EvolutionCoefficients> {
    if (norm_sq(y).sqrt() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("direction must be Euclidean-unit".into()));
    }
    let m = source.metric()?;
    m.check_point(x, y)?;
    let xy = dot(x, y);
    let x2 = norm_sq(x);
    let wedge = x2 * norm_sq(y) - xy * xy;
    let tag = source.tag();
    let hyperbolic = |a: f64, b: f64, scale: f64| EvolutionCoefficients {
        a,
        b,
        source: tag,
        law: EvolutionLaw::Hyperbolic,
        scale,
    };
    let out = match source {
        EvolutionSource::Spherical { .. } => {
            let d4 = (norm_sq(y) + wedge).powf(0.25);
            let s = (1.0 + x2).sqrt();
            EvolutionCoefficients {
                a: s / d4,
                b: xy / (s * d4),
                source: tag,
                law: EvolutionLaw::Elliptic,
                scale: 1.0,
            }
        }
        EvolutionSource::Klein { .. } => {
            let d4 = (norm_sq(y) - wedge).powf(0.25);
            let s = (1.0 - x2).sqrt();
            hyperbolic(s / d4, -xy / (s * d4), 1.0)
        }
        EvolutionSource::FunkPlus { .. } | EvolutionSource::FunkMinus { .. } => {
            let f = m.eval(x, y)?;
            let a = (2.0 / f).sqrt();
            let sign = if matches!(source, EvolutionSource::FunkPlus { .. }) {
                1.0
            } else {
                -1.0
            };
            hyperbolic(a, -sign / a, 2.0)
        }
        EvolutionSource::Hilbert { dim, body } => {
            let (fm, fp) = match body {
                None => (
                    funk_ball(*dim, FunkSign::Minus)?.eval(x, y)?,
                    funk_ball(*dim, FunkSign::Plus)?.eval(x, y)?,
                ),
                Some(b) => (
                    super::funk_general(b, x, y, FunkSign::Minus)?,
                    super::funk_general(b, x, y, FunkSign::Plus)?,
                ),
            };
            let s = (fm + fp).sqrt();
            hyperbolic(2f64.sqrt() / s, (fm - fp) / (2f64.sqrt() * s), 1.0)
        }
        EvolutionSource::Paraboloid { .. } | EvolutionSource::Bryant { .. } => {
            let (a, b) = matched_coefficients(&m, x, y)?;
            let law = if matches!(source, EvolutionSource::Bryant { .. }) {
                EvolutionLaw::Elliptic
            } else {
                EvolutionLaw::Hyperbolic
            };
            EvolutionCoefficients {
                a,
                b,
                source: tag,
                law,
                scale: 1.0,
            }
        }
    };
    Ok(out)
}

/// `a = F~^(-1/2)`, `b = -1/2 F~^(-3/2) dF~/dt` at `t = 0`, from a jet.
fn matched_coefficients(m: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let f = m.jet_at(x, y, 1)?;
    let fv = f.value();
    let dfdt: f64 = (0..x.len()).map(|k| f.d1(k) * y[k]).sum();
    Ok((fv.powf(-0.5), -0.5 * fv.powf(-1.5) * dfdt))
}

/// `max_t |F~(x + t y, y) - law(t)| / F~` over `t_grid`.
pub fn verify_evolution(source: &EvolutionSource, x: &[f64], y: &[f64], t_grid: &[f64]) -> Result<f64> {
    let coeffs = evolution_coefficients(source, x, y)?;
    let m = source.metric()?;
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + t * b).collect();
        let f = m.eval(&p, y)?;
        worst = worst.max((f - coeffs.predict(t)).abs() / f);
    }
    Ok(worst)
}
