//! Fundamental tensor, spray, Riemann curvature and Einstein residuals.

mod geodesic;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetLayout};
use crate::linalg::{self, bilinear, mat_vec, symmetric_eigenvalues};
use crate::metric::FinslerMetric;
use crate::sampling::{tangent_samples, SampleBox, DEFAULT_OFFSET};

pub use geodesic::{integrate_geodesic, ExitReason, GeodesicPath, GeodesicSample};

/// Fundamental tensors with a spectral condition number above this are
/// reported as non-Minkowski.
pub const MAX_CONDITION: f64 = 1e12;

/// Flags closer than this `g_y`-angle to the flagpole are rejected.
pub const MIN_FLAG_ANGLE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalTensor {
    pub g: Vec<Vec<f64>>,
    pub g_inv: Vec<Vec<f64>>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// `g_ij = 1/2 d^2[F^2]/dy^i dy^j` at `(x, y)`.
pub fn fundamental_tensor(m: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<FundamentalTensor> {
    let f = m.jet_at(x, y, 2)?;
    let f2 = &f * &f;
    let n = m.dim();
    let g: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * f2.d2(n + i, n + j)).collect())
        .collect();
    check_minkowski_matrix(&g)?;
    let g_inv = linalg::inverse(&g).map_err(|s| Error::Numeric(s.to_string()))?;
    Ok(FundamentalTensor {
        g,
        g_inv,
        x: x.to_vec(),
        y: y.to_vec(),
    })
}

fn check_minkowski_matrix(g: &[Vec<f64>]) -> Result<()> {
    let ev = symmetric_eigenvalues(g);
    let min = ev[0];
    let max = ev[ev.len() - 1];
    if !(min > 0.0) || !max.is_finite() {
        return Err(Error::NonMinkowski {
            condition: f64::INFINITY,
        });
    }
    let condition = max / min;
    if condition > MAX_CONDITION {
        return Err(Error::NonMinkowski { condition });
    }
    Ok(())
}

/// Spray coefficients as jets of total order `order` (at most 2) in the seeded
/// `(x, y)` variables, together with the value of `g`.
pub(crate) struct SprayJets {
    pub g: Vec<Vec<f64>>,
    pub f: f64,
    pub spray: Vec<Jet>,
}

pub(crate) fn spray_jets(m: &FinslerMetric, x: &[f64], y: &[f64], order: usize) -> Result<SprayJets> {
    assert!(order <= 2, "spray jets are limited to order 2");
    let n = m.dim();
    let f = m.jet_at(x, y, order + 2)?;
    let f2 = &f * &f;
    let dy: Vec<Jet> = (0..n).map(|l| f2.differentiate(n + l)).collect();
    let g: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| dy[i].differentiate(n + j) * 0.5).collect())
        .collect();
    let g_val: Vec<Vec<f64>> = g.iter().map(|row| row.iter().map(Jet::value).collect()).collect();
    check_minkowski_matrix(&g_val)?;

    let layout = JetLayout::get(2 * n, order);
    let y_jets: Vec<Jet> = (0..n).map(|k| Jet::variable(&layout, n + k, y[k])).collect();
    let rhs: Vec<Jet> = (0..n)
        .map(|l| {
            let mut acc = -f2.differentiate(l).truncate(order);
            for (k, yk) in y_jets.iter().enumerate() {
                acc = acc + dy[l].differentiate(k) * yk.clone();
            }
            acc
        })
        .collect();
    let w = linalg::solve(g, rhs).map_err(|s| Error::Numeric(s.to_string()))?;
    Ok(SprayJets {
        g: g_val,
        f: f.value(),
        spray: w.into_iter().map(|j| j * 0.25).collect(),
    })
}

/// `G^i(x, y)`.
pub fn spray_coefficients(m: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    Ok(spray_jets(m, x, y, 0)?.spray.iter().map(Jet::value).collect())
}

/// `(K(P, y), v)` for one flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagValue {
    pub v: Vec<f64>,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: f64,
    pub g: Vec<Vec<f64>>,
    /// `r_matrix[i][k] = R^i_k(y)`.
    pub r_matrix: Vec<Vec<f64>>,
    pub ricci: f64,
    pub flag_values: Vec<FlagValue>,
}

impl CurvatureSample {
    /// `R_y(u)`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        mat_vec(&self.r_matrix, u)
    }

    /// Flag curvature of the plane spanned by `y` and `v`.
    pub fn flag_curvature(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.y.len() {
            return Err(Error::DimensionMismatch {
                expected: self.y.len(),
                got: v.len(),
            });
        }
        let g = &self.g;
        let gyy = bilinear(g, &self.y, &self.y);
        let gvv = bilinear(g, v, v);
        let proj = bilinear(g, v, &self.y) / gyy;
        let w: Vec<f64> = v.iter().zip(&self.y).map(|(a, b)| a - proj * b).collect();
        let gww = bilinear(g, &w, &w);
        let angle = if gvv > 0.0 { (gww.max(0.0) / gvv).sqrt() } else { 0.0 };
        if !(angle >= MIN_FLAG_ANGLE) {
            return Err(Error::DegenerateFlag { angle });
        }
        let gwy = bilinear(g, &w, &self.y);
        let num = bilinear(g, &self.apply(&w), &w);
        Ok(num / (gyy * gww - gwy * gwy))
    }

    /// `n - 1` vectors completing `y` to a `g_y`-orthogonal frame.
    pub fn default_frame(&self) -> Vec<Vec<f64>> {
        let n = self.y.len();
        let g = &self.g;
        let mut frame: Vec<Vec<f64>> = vec![self.y.clone()];
        for axis in 0..n {
            if frame.len() == n {
                break;
            }
            let mut w = vec![0.0; n];
            w[axis] = 1.0;
            for e in &frame {
                let c = bilinear(g, &w, e) / bilinear(g, e, e);
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= c * ei;
                }
            }
            let len = bilinear(g, &w, &w).max(0.0).sqrt();
            if len > 1e-3 {
                frame.push(w.into_iter().map(|c| c / len).collect());
            }
        }
        frame.split_off(1)
    }
}

/// `R^i_k(y)`, Ricci scalar and flag curvatures on the default frame.
pub fn riemann_curvature(m: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<CurvatureSample> {
    let mut s = curvature_core(m, x, y)?;
    let frame = s.default_frame();
    s.flag_values = frame
        .into_iter()
        .map(|v| {
            let k = s.flag_curvature(&v)?;
            Ok(FlagValue { v, k })
        })
        .collect::<Result<_>>()?;
    Ok(s)
}

/// As [`riemann_curvature`] with caller-supplied flag vectors.
pub fn riemann_curvature_with_flags(
    m: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    flags: &[Vec<f64>],
) -> Result<CurvatureSample> {
    let mut s = curvature_core(m, x, y)?;
    s.flag_values = flags
        .iter()
        .map(|v| {
            let k = s.flag_curvature(v)?;
            Ok(FlagValue { v: v.clone(), k })
        })
        .collect::<Result<_>>()?;
    Ok(s)
}

pub(crate) fn curvature_core(m: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<CurvatureSample> {
    let n = m.dim();
    let sj = spray_jets(m, x, y, 2)?;
    let r_matrix = riemann_from_spray(&sj.spray, y);
    let ricci = (0..n).map(|i| r_matrix[i][i]).sum();
    Ok(CurvatureSample {
        x: x.to_vec(),
        y: y.to_vec(),
        f: sj.f,
        g: sj.g,
        r_matrix,
        ricci,
        flag_values: Vec::new(),
    })
}

/// `R^i_k = 2 dG^i/dx^k - d^2G^i/dx^j dy^k y^j + 2 G^j d^2G^i/dy^j dy^k
/// - dG^i/dy^j dG^j/dy^k` from order-2 spray jets.
pub(crate) fn riemann_from_spray(spray: &[Jet], y: &[f64]) -> Vec<Vec<f64>> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let gi = &spray[i];
            (0..n)
                .map(|k| {
                    let mut r = 2.0 * gi.d1(k);
                    for j in 0..n {
                        r -= gi.d2(j, n + k) * y[j];
                        r += 2.0 * spray[j].value() * gi.d2(n + j, n + k);
                        r -= gi.d1(n + j) * spray[j].d1(n + k);
                    }
                    r
                })
                .collect()
        })
        .collect()
}

/// Deterministic tangent samples from the metric's own sample box.
pub fn default_samples(m: &FinslerMetric, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    tangent_samples(m, m.sample_box(), count, DEFAULT_OFFSET)
}

/// `max |Ric(y) - (n-1) lambda F^2(y)| / F^2(y)` over `samples` default samples.
///
/// A sample where the curvature cannot be computed counts as an infinite
/// residual.
pub fn einstein_residual(m: &FinslerMetric, lambda: f64, samples: usize) -> f64 {
    einstein_residual_at(m, lambda, &default_samples(m, samples))
}

pub fn einstein_residual_at(m: &FinslerMetric, lambda: f64, points: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let n = m.dim() as f64;
    points
        .par_iter()
        .map(|(x, y)| match curvature_core(m, x, y) {
            Ok(s) => {
                let f2 = s.f * s.f;
                (s.ricci - (n - 1.0) * lambda * f2).abs() / f2
            }
            Err(_) => f64::INFINITY,
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinkowskiReport {
    pub samples: usize,
    /// `max |F(x, s y) - s F(x, y)| / (s F(x, y))` over `s` in {0.5, 2, 3}.
    pub max_homogeneity_violation: f64,
    pub min_eigenvalue: f64,
    pub positivity_violations: usize,
    pub failures: Vec<String>,
}

impl MinkowskiReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.positivity_violations == 0 && self.max_homogeneity_violation < 1e-10
    }
}

/// Scans deterministic samples for homogeneity, positivity and convexity.
pub fn check_minkowski(m: &FinslerMetric, sample_budget: usize) -> MinkowskiReport {
    check_minkowski_in(m, m.sample_box(), sample_budget)
}

pub fn check_minkowski_in(m: &FinslerMetric, bbox: &SampleBox, sample_budget: usize) -> MinkowskiReport {
    let pts = tangent_samples(m, bbox, sample_budget.max(1), DEFAULT_OFFSET);
    let mut report = MinkowskiReport {
        samples: pts.len(),
        max_homogeneity_violation: 0.0,
        min_eigenvalue: f64::INFINITY,
        positivity_violations: 0,
        failures: Vec::new(),
    };
    for (x, y) in &pts {
        let f = m.eval_unchecked(x, y);
        if !(f > 0.0 && f.is_finite()) {
            report.positivity_violations += 1;
            report.failures.push(format!("F({x:?}, {y:?}) = {f}"));
            continue;
        }
        for s in [0.5, 2.0, 3.0] {
            let ys: Vec<f64> = y.iter().map(|c| c * s).collect();
            let v = (m.eval_unchecked(x, &ys) - s * f).abs() / (s * f);
            report.max_homogeneity_violation = report.max_homogeneity_violation.max(v);
        }
        match m.jet_at(x, y, 2) {
            Ok(fj) => {
                let f2 = &fj * &fj;
                let n = m.dim();
                let g: Vec<Vec<f64>> = (0..n)
                    .map(|i| (0..n).map(|j| 0.5 * f2.d2(n + i, n + j)).collect())
                    .collect();
                let ev = symmetric_eigenvalues(&g)[0];
                report.min_eigenvalue = report.min_eigenvalue.min(ev);
                if !(ev > 0.0) {
                    report.failures.push(format!("g not positive definite at {x:?}, {y:?}"));
                }
            }
            Err(e) => report.failures.push(format!("{e} at {x:?}, {y:?}")),
        }
    }
    if pts.is_empty() {
        report.failures.push("no sample points inside the domain".into());
    }
    report
}
