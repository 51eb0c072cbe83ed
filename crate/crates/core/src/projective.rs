//! Pointwise projective relatedness of a candidate metric to a base metric.
//!
//! All derivatives along the base spray are taken in the jet ring. Covariant
//! derivatives of a scalar `f` on `TM` follow
//! `f_{;k} = df/dx^k - (dG^l/dy^k) df/dy^l`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curvature_core, spray_jets, CurvatureSample};
use crate::jets::{seed_variables, Jet, JetLayout};
use crate::linalg::{bilinear, norm};
use crate::metric::{Evaluate, FinslerMetric};
use crate::sampling::{tangent_samples, DEFAULT_OFFSET};

/// Residuals below this (after normalization) count as projectively related.
pub const RELATED_THRESHOLD: f64 = 1e-6;

/// Largest accepted spray defect `|G~ - G - P y|` in [`projective_factor`].
pub const SPRAY_DEFECT_TOL: f64 = 1e-7;

/// Covariant derivatives `f_{;k}` as jets of order `min(ord f, ord G) - 1`.
fn covariant_jets(spray: &[Jet], f: &Jet) -> Vec<Jet> {
    let n = spray.len();
    let df_dy: Vec<Jet> = (0..n).map(|l| f.differentiate(n + l)).collect();
    (0..n)
        .map(|k| {
            let mut acc = f.differentiate(k);
            for (l, gl) in spray.iter().enumerate() {
                acc = &acc - &(&gl.differentiate(n + k) * &df_dy[l]);
            }
            acc
        })
        .collect()
}

fn contract_y(v: &[Jet], y: &[f64]) -> Jet {
    let n = y.len();
    let layout = JetLayout::get(2 * n, v[0].order());
    let mut acc = v[0].constant_like(0.0);
    for (k, vk) in v.iter().enumerate() {
        acc = acc + vk * &Jet::variable(&layout, n + k, y[k]);
    }
    acc
}

fn seeded_jet(f: &dyn Evaluate, x: &[f64], y: &[f64], order: usize) -> Result<Jet> {
    let vars = seed_variables(x, y, order)?;
    let (xs, ys) = vars.split_at(x.len());
    let j = f.jet(xs, ys);
    if j.coeffs().iter().all(|c| c.is_finite()) {
        Ok(j)
    } else {
        Err(Error::Numeric("function jet is not finite".into()))
    }
}

fn check_pair(base: &FinslerMetric, cand: &FinslerMetric) -> Result<()> {
    if base.dim() != cand.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: cand.dim(),
        });
    }
    Ok(())
}

/// `f_{;k}` at `(x, y)` along the spray of `base`.
pub fn covariant_derivative(base: &FinslerMetric, f: &dyn Evaluate, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let sj = spray_jets(base, x, y, 1)?;
    let fj = seeded_jet(f, x, y, 1)?;
    Ok(covariant_jets(&sj.spray, &fj).iter().map(Jet::value).collect())
}

/// Jet-level projective quantities at one point.
struct Local {
    f_cand: f64,
    f_base: f64,
    /// `F~_{;k}` to first order.
    cov: Vec<Jet>,
    /// `P` to first order.
    p: Jet,
    /// `P_{;k}` values.
    p_cov: Vec<f64>,
}

impl Local {
    fn new(base: &FinslerMetric, cand: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<Self> {
        check_pair(base, cand)?;
        let sj = spray_jets(base, x, y, 2)?;
        let ft = cand.jet_at(x, y, 2)?;
        let cov = covariant_jets(&sj.spray, &ft);
        let p = contract_y(&cov, y) / (ft.clone() * 2.0);
        let p_cov = covariant_jets(&sj.spray, &p).iter().map(Jet::value).collect();
        Ok(Self {
            f_cand: ft.value(),
            f_base: sj.f,
            cov,
            p,
            p_cov,
        })
    }

    fn xi(&self, y: &[f64]) -> f64 {
        let p = self.p.value();
        p * p - self.p_cov.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// `max_l |dF~_{;k}/dy^l y^k - F~_{;l}| / F~` at one point.
pub fn rapcsak_residual_at(base: &FinslerMetric, cand: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    let loc = Local::new(base, cand, x, y)?;
    let n = x.len();
    let res: Vec<f64> = (0..n)
        .map(|l| {
            let lhs: f64 = (0..n).map(|k| loc.cov[k].d1(n + l) * y[k]).sum();
            lhs - loc.cov[l].value()
        })
        .collect();
    Ok(norm(&res) / loc.f_cand)
}

/// Deterministic `(x, y)` samples in the candidate's box and both domains.
pub fn pair_samples(base: &FinslerMetric, cand: &FinslerMetric, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut pts = tangent_samples(cand, cand.sample_box(), count, DEFAULT_OFFSET);
    pts.retain(|(x, _)| base.contains(x));
    pts
}

fn max_over<F>(pts: &[(Vec<f64>, Vec<f64>)], f: F) -> f64
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    pts.par_iter()
        .map(|(x, y)| f(x, y).unwrap_or(f64::INFINITY))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Maximum normalized Rapcsák residual over `samples` deterministic points.
/// Points where the residual cannot be computed count as infinite.
pub fn rapcsak_residual(base: &FinslerMetric, cand: &FinslerMetric, samples: usize) -> f64 {
    let pts = pair_samples(base, cand, samples);
    max_over(&pts, |x, y| rapcsak_residual_at(base, cand, x, y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectiveFactor {
    pub p: f64,
    /// `max_i |G~^i - G^i - P y^i| / (F~ |y|)`.
    pub spray_defect: f64,
}

/// `P = F~_{;k} y^k / (2 F~)`, checked against `G~^i = G^i + P y^i`.
pub fn projective_factor(base: &FinslerMetric, cand: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<ProjectiveFactor> {
    let loc = Local::new(base, cand, x, y)?;
    let p = loc.p.value();
    let g = spray_jets(base, x, y, 0)?.spray;
    let gt = spray_jets(cand, x, y, 0)?.spray;
    let scale = loc.f_cand * norm(y);
    let spray_defect = (0..x.len())
        .map(|i| (gt[i].value() - g[i].value() - p * y[i]).abs() / scale)
        .fold(0.0, f64::max);
    if !(spray_defect <= SPRAY_DEFECT_TOL) {
        return Err(Error::NotProjectivelyRelated { defect: spray_defect });
    }
    Ok(ProjectiveFactor { p, spray_defect })
}

/// `Xi = P^2 - P_{;k} y^k`.
pub fn xi(base: &FinslerMetric, cand: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(Local::new(base, cand, x, y)?.xi(y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiTau {
    pub xi: f64,
    pub tau: Vec<f64>,
}

/// `Xi` and `tau_k = 3 (P_{;k} - 1/2 d[P^2]/dy^k) + dXi/dy^k`.
///
/// `dXi/dy^k` would need fifth derivatives of the base metric, one beyond the
/// jet order; it is taken by Richardson-extrapolated central differences of the
/// jet-exact `Xi`.
pub fn xi_and_tau(base: &FinslerMetric, cand: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<XiTau> {
    let loc = Local::new(base, cand, x, y)?;
    let n = x.len();
    let xi0 = loc.xi(y);
    let p = loc.p.value();
    let h = 1e-3 * norm(y);
    let xi_at = |k: usize, step: f64| -> Result<f64> {
        let mut ys = y.to_vec();
        ys[k] += step;
        Ok(Local::new(base, cand, x, &ys)?.xi(&ys))
    };
    let mut tau = Vec::with_capacity(n);
    for k in 0..n {
        let d = |s: f64| -> Result<f64> { Ok((xi_at(k, s)? - xi_at(k, -s)?) / (2.0 * s)) };
        let dxi = (4.0 * d(0.5 * h)? - d(h)?) / 3.0;
        let dp2 = 2.0 * p * loc.p.d1(n + k);
        tau.push(3.0 * (loc.p_cov[k] - 0.5 * dp2) + dxi);
    }
    Ok(XiTau { xi: xi0, tau })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformCheck {
    /// `|R~_y(u) - R_y(u) - Xi u - tau(u) y| / (F~^2 |u|)`.
    pub curvature_defect: f64,
    /// `|Ric~ - Ric - (n - 1) Xi| / F~^2`.
    pub ricci_defect: f64,
    pub xi: f64,
}

/// Compares the candidate curvature computed directly with the transform of
/// the base curvature by `Xi` and `tau`.
pub fn curvature_transform_check(
    base: &FinslerMetric,
    cand: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    u: &[f64],
) -> Result<TransformCheck> {
    if norm(u) == 0.0 || u.len() != x.len() {
        return Err(Error::ZeroVector);
    }
    let rb = curvature_core(base, x, y)?;
    let rc = curvature_core(cand, x, y)?;
    let xt = xi_and_tau(base, cand, x, y)?;
    let tau_u: f64 = xt.tau.iter().zip(u).map(|(a, b)| a * b).sum();
    let lhs = rc.apply(u);
    let rhs = rb.apply(u);
    let diff: Vec<f64> = (0..x.len())
        .map(|i| lhs[i] - rhs[i] - xt.xi * u[i] - tau_u * y[i])
        .collect();
    let f2 = rc.f * rc.f;
    let n = x.len() as f64;
    Ok(TransformCheck {
        curvature_defect: norm(&diff) / (f2 * norm(u)),
        ricci_defect: (rc.ricci - rb.ricci - (n - 1.0) * xt.xi).abs() / f2,
        xi: xt.xi,
    })
}

/// Defect of `R~_y(u) = R_y(u) - mu^2 (F~^2 u - g~_y(y, u) y)`, normalized by
/// `F~^2 |u|`.
pub fn funk_curvature_form_residual(
    base: &FinslerMetric,
    cand: &FinslerMetric,
    mu: f64,
    x: &[f64],
    y: &[f64],
    u: &[f64],
) -> Result<f64> {
    let rb: CurvatureSample = curvature_core(base, x, y)?;
    let rc = curvature_core(cand, x, y)?;
    let f2 = rc.f * rc.f;
    let gyu = bilinear(&rc.g, y, u);
    let lhs = rc.apply(u);
    let rhs = rb.apply(u);
    let diff: Vec<f64> = (0..x.len())
        .map(|i| lhs[i] - rhs[i] + mu * mu * (f2 * u[i] - gyu * y[i]))
        .collect();
    Ok(norm(&diff) / (f2 * norm(u)))
}

/// `max_k |F~_{;k} - mu d[F~^2]/dy^k| / F~` at one point.
pub fn funk_condition_residual_at(
    cand: &FinslerMetric,
    mu: f64,
    base: &FinslerMetric,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_pair(base, cand)?;
    let sj = spray_jets(base, x, y, 1)?;
    let ft = cand.jet_at(x, y, 1)?;
    let cov = covariant_jets(&sj.spray, &ft);
    let n = x.len();
    let f = ft.value();
    Ok((0..n)
        .map(|k| (cov[k].value() - mu * 2.0 * f * ft.d1(n + k)).abs() / f)
        .fold(0.0, f64::max))
}

pub fn funk_condition_residual(cand: &FinslerMetric, mu: f64, base: &FinslerMetric, samples: usize) -> f64 {
    let pts = pair_samples(base, cand, samples);
    max_over(&pts, |x, y| funk_condition_residual_at(cand, mu, base, x, y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointValue {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
}

/// Least-squares `(lambda, lambda~)` with `Xi ≈ lambda~ F~^2 - lambda F^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinsteinFit {
    pub lambda: f64,
    pub lambda_tilde: f64,
    /// Largest `|Xi - lambda~ F~^2 + lambda F^2| / F~^2` at the fit.
    pub misfit: f64,
    /// The two columns are numerically dependent (`F~` proportional to `F`):
    /// only the combination is determined and `lambda` is set to zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectiveReport {
    pub base: String,
    pub cand: String,
    pub rapcsak_residual_max: f64,
    pub p_samples: Vec<PointValue>,
    pub xi_samples: Vec<PointValue>,
    /// Residual of `Xi = lambda~ F~^2 - lambda F^2` for the supplied or
    /// declared constants; `None` when neither metric declares one.
    pub einstein_relation_residual_max: Option<f64>,
    pub constants: Option<(f64, f64)>,
    pub fit: EinsteinFit,
    pub related: bool,
}

struct SampleQuantities {
    rapcsak: f64,
    p: f64,
    xi: f64,
    f_base: f64,
    f_cand: f64,
}

fn sample_quantities(base: &FinslerMetric, cand: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<SampleQuantities> {
    let loc = Local::new(base, cand, x, y)?;
    let n = x.len();
    let res: Vec<f64> = (0..n)
        .map(|l| (0..n).map(|k| loc.cov[k].d1(n + l) * y[k]).sum::<f64>() - loc.cov[l].value())
        .collect();
    Ok(SampleQuantities {
        rapcsak: norm(&res) / loc.f_cand,
        p: loc.p.value(),
        xi: loc.xi(y),
        f_base: loc.f_base,
        f_cand: loc.f_cand,
    })
}

/// Least-squares fit of `Xi_i ≈ lambda~ F~_i^2 - lambda F_i^2`, rows weighted
/// by `1 / F~_i^2`.
pub fn fit_einstein_constants(xi: &[f64], f_base: &[f64], f_cand: &[f64]) -> EinsteinFit {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..xi.len() {
        let w = 1.0 / (f_cand[i] * f_cand[i]);
        let c1 = f_cand[i] * f_cand[i] * w;
        let c2 = -f_base[i] * f_base[i] * w;
        let r = xi[i] * w;
        a11 += c1 * c1;
        a12 += c1 * c2;
        a22 += c2 * c2;
        b1 += c1 * r;
        b2 += c2 * r;
    }
    let det = a11 * a22 - a12 * a12;
    let (lt, l, degenerate) = if det.abs() > 1e-10 * (a11 * a22).max(f64::MIN_POSITIVE) {
        ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det, false)
    } else {
        (if a11 > 0.0 { b1 / a11 } else { 0.0 }, 0.0, true)
    };
    let misfit = (0..xi.len())
        .map(|i| (xi[i] - lt * f_cand[i].powi(2) + l * f_base[i].powi(2)).abs() / f_cand[i].powi(2))
        .fold(0.0, f64::max);
    EinsteinFit {
        lambda: l,
        lambda_tilde: lt,
        misfit,
        degenerate,
    }
}

/// Full report over `samples` deterministic points. `constants` are
/// `(lambda, lambda~)`; when absent the declared Einstein constants of both
/// metrics are used if available.
pub fn projective_report(
    base: &FinslerMetric,
    cand: &FinslerMetric,
    samples: usize,
    constants: Option<(f64, f64)>,
) -> Result<ProjectiveReport> {
    check_pair(base, cand)?;
    let pts = pair_samples(base, cand, samples);
    if pts.is_empty() {
        return Err(Error::InvalidParameter("metric domains share no sample points".into()));
    }
    let quantities: Vec<SampleQuantities> = pts
        .par_iter()
        .map(|(x, y)| sample_quantities(base, cand, x, y))
        .collect::<Result<_>>()?;
    let constants = constants.or(match (base.einstein_constant(), cand.einstein_constant()) {
        (Some(l), Some(lt)) => Some((l, lt)),
        _ => None,
    });
    let einstein_relation_residual_max = constants.map(|(l, lt)| {
        quantities
            .iter()
            .map(|q| (q.xi - lt * q.f_cand * q.f_cand + l * q.f_base * q.f_base).abs() / (q.f_cand * q.f_cand))
            .fold(0.0, f64::max)
    });
    let xs: Vec<f64> = quantities.iter().map(|q| q.xi).collect();
    let fb: Vec<f64> = quantities.iter().map(|q| q.f_base).collect();
    let fc: Vec<f64> = quantities.iter().map(|q| q.f_cand).collect();
    let fit = fit_einstein_constants(&xs, &fb, &fc);
    let rapcsak_residual_max = quantities.iter().map(|q| q.rapcsak).fold(0.0, f64::max);
    let point = |(x, y): &(Vec<f64>, Vec<f64>), value: f64| PointValue {
        x: x.clone(),
        y: y.clone(),
        value,
    };
    Ok(ProjectiveReport {
        base: base.name().to_string(),
        cand: cand.name().to_string(),
        rapcsak_residual_max,
        p_samples: pts.iter().zip(&quantities).map(|(pt, q)| point(pt, q.p)).collect(),
        xi_samples: pts.iter().zip(&quantities).map(|(pt, q)| point(pt, q.xi)).collect(),
        einstein_relation_residual_max,
        constants,
        fit,
        related: rapcsak_residual_max < RELATED_THRESHOLD,
    })
}
