//! Quantitative end-to-end checks of the geometry, comparison and zoo layers.
//!
//! Every criterion returns a [`CriterionReport`] made of labelled checks; a
//! criterion passes when all its checks do. Sampling is Halton-based, so every
//! run produces the same numbers.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::comparison::{
    a_grid, b_grid, classify_completeness, closed_form, implicit_time, make_case, monotone_segment, numeric_integrate,
    ComparisonSolution, ExceptionalFamily, LengthClass,
};
use crate::error::Result;
use crate::geometry::{curvature_core, default_samples, integrate_geodesic, spray_coefficients};
use crate::jets::{fd_oracle, fd_oracle_with, FdSettings};
use crate::linalg::norm;
use crate::metric::FinslerMetric;
use crate::projective::{
    curvature_transform_check, funk_condition_residual, projective_factor, rapcsak_residual, xi_and_tau,
};
use crate::quadrature;
use crate::sampling::Halton;
use crate::zoo::{self, ConvexBody, EvolutionSource, FunkSign};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    /// Measured quantity (a residual, or a mismatch count for exact checks).
    pub value: f64,
    /// Strict upper bound on `value`.
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(label: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            value,
            tolerance,
            passed: value < tolerance,
        }
    }

    /// Exact check: `value` counts failures and must be zero.
    fn count(label: impl Into<String>, failures: usize) -> Self {
        Self::below(label, failures as f64, 0.5)
    }

    fn from_result(label: impl Into<String>, r: Result<f64>, tolerance: f64) -> Self {
        let label = label.into();
        match r {
            Ok(v) => Self::below(label, v, tolerance),
            Err(e) => Self {
                label: format!("{label} ({e})"),
                value: f64::INFINITY,
                tolerance,
                passed: false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    fn new(id: usize, name: &'static str, checks: Vec<Check>) -> Self {
        Self {
            id,
            name,
            passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
            checks,
        }
    }

    /// The check closest to (or furthest past) its tolerance.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().max_by(|a, b| {
            let ra = a.value / a.tolerance;
            let rb = b.value / b.tolerance;
            ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Greater)
        })
    }

    /// One-line summary: `PASS [id] name: worst check`.
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let worst = self
            .worst()
            .map(|c| format!("{} = {:.3e} (tol {:.1e})", c.label, c.value, c.tolerance))
            .unwrap_or_else(|| "no checks".into());
        format!("{verdict} [{}] {}: {worst}", self.id, self.name)
    }
}

pub const CRITERIA: &[(usize, &str)] = &[
    (1, "curvature constants"),
    (2, "projectivity"),
    (3, "funk equation"),
    (4, "projective factor and xi"),
    (5, "curvature transform"),
    (6, "comparison equation"),
    (7, "length laws"),
    (8, "evolution laws"),
    (9, "rigidity taxonomy"),
    (10, "derivative integrity"),
];

/// Runs one criterion by id (1 to 10).
pub fn run(id: usize) -> Option<CriterionReport> {
    let checks = match id {
        1 => curvature_constants(),
        2 => projectivity(),
        3 => funk_equation(),
        4 => projective_factor_and_xi(),
        5 => curvature_transform(),
        6 => comparison_equation(),
        7 => length_laws(),
        8 => evolution_laws(),
        9 => rigidity_taxonomy(),
        10 => derivative_integrity(),
        _ => return None,
    };
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1)?;
    Some(CriterionReport::new(id, name, checks))
}

/// All criteria in id order.
pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.par_iter().map(|(id, _)| run(*id).expect("known id")).collect()
}

fn ellipse() -> ConvexBody {
    ConvexBody::ellipsoid(&[2.0, 1.0]).expect("valid ellipse")
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v)
        }
    })
}

fn worst_over<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync) -> f64 {
    let values: Vec<f64> = items.par_iter().map(|it| f(it).unwrap_or(f64::INFINITY)).collect();
    max_of(values)
}

const FLAG_SAMPLES: usize = 50;
const FLAGS_PER_SAMPLE: usize = 20;

/// `max |K(P, y) - k|` over Halton samples and Halton flag vectors.
pub fn flag_residual(m: &FinslerMetric, k: f64, samples: usize, flags: usize) -> f64 {
    let n = m.dim();
    let pts = default_samples(m, samples);
    if pts.len() < samples {
        return f64::INFINITY;
    }
    worst_over(&pts, |(x, y)| {
        let s = curvature_core(m, x, y)?;
        let seq = Halton::new(n, 101);
        let mut worst: f64 = 0.0;
        let mut found = 0;
        for idx in 1..1000u64 {
            if found == flags {
                break;
            }
            let v: Vec<f64> = seq.point(idx).iter().map(|t| 2.0 * t - 1.0).collect();
            match s.flag_curvature(&v) {
                Ok(kv) => {
                    worst = worst.max((kv - k).abs());
                    found += 1;
                }
                Err(crate::Error::DegenerateFlag { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(worst)
    })
}

fn curvature_constants() -> Vec<Check> {
    let body = ellipse();
    let metrics: Vec<(&str, Result<FinslerMetric>, f64)> = vec![
        ("klein", zoo::klein(3), -1.0),
        ("funk+", zoo::funk_ball(3, FunkSign::Plus), -0.25),
        ("funk-", zoo::funk_ball(3, FunkSign::Minus), -0.25),
        (
            "half funk+",
            zoo::funk_ball(3, FunkSign::Plus).and_then(|m| m.scaled(0.5)),
            -1.0,
        ),
        (
            "half funk-",
            zoo::funk_ball(3, FunkSign::Minus).and_then(|m| m.scaled(0.5)),
            -1.0,
        ),
        ("spherical", zoo::spherical(3), 1.0),
        ("hilbert on ellipse", zoo::hilbert_general(&body), -1.0),
        ("paraboloid", zoo::paraboloid(3), -1.0),
    ];
    metrics
        .into_iter()
        .map(|(label, m, k)| {
            let value = m
                .map(|m| flag_residual(&m, k, FLAG_SAMPLES, FLAGS_PER_SAMPLE))
                .unwrap_or(f64::INFINITY);
            Check::below(format!("{label} K = {k}"), value, 1e-5)
        })
        .collect()
}

fn projective_candidates() -> Vec<(String, Result<FinslerMetric>)> {
    vec![
        ("klein".into(), zoo::klein(2)),
        ("funk+".into(), zoo::funk_ball(2, FunkSign::Plus)),
        ("funk-".into(), zoo::funk_ball(2, FunkSign::Minus)),
        ("hilbert ball".into(), zoo::hilbert_ball(2)),
        ("hilbert ellipse".into(), zoo::hilbert_general(&ellipse())),
        ("spherical".into(), zoo::spherical(2)),
        ("bryant 0.5".into(), zoo::bryant(2, 0.5)),
        ("bryant 1".into(), zoo::bryant(2, 1.0)),
    ]
}

/// Largest Euclidean distance of `c(t)`, `|t| <= t_max`, from the line through
/// `c(0)` along `c'(0)`.
pub fn line_deviation(m: &FinslerMetric, x0: &[f64], y0: &[f64], t_max: f64) -> Result<f64> {
    let path = integrate_geodesic(m, x0, y0, (-t_max, t_max), 1e-11)?;
    let dir: Vec<f64> = {
        let l = norm(y0);
        y0.iter().map(|v| v / l).collect()
    };
    let (lo, hi) = (path.t_min.max(-t_max), path.t_max.min(t_max));
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let t = lo + (hi - lo) * k as f64 / 200.0;
        let Some((x, _)) = path.eval(t) else { continue };
        let d: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
        let along: f64 = d.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let perp: Vec<f64> = d.iter().zip(&dir).map(|(a, b)| a - along * b).collect();
        worst = worst.max(norm(&perp));
    }
    Ok(worst)
}

fn projectivity() -> Vec<Check> {
    let e = zoo::euclidean(2).expect("euclidean");
    let mut checks = Vec::new();
    for (label, m) in projective_candidates() {
        let Ok(m) = m else {
            checks.push(Check::below(format!("{label} construction"), f64::INFINITY, 1e-7));
            continue;
        };
        checks.push(Check::below(
            format!("{label} rapcsak"),
            rapcsak_residual(&e, &m, 50),
            1e-7,
        ));
        let starts = default_samples(&m, 3);
        let dev = worst_over(&starts, |(x, y)| line_deviation(&m, x, y, 1.0));
        checks.push(Check::below(format!("{label} geodesic line deviation"), dev, 1e-7));
    }
    checks
}

fn funk_equation() -> Vec<Check> {
    let e = zoo::euclidean(2).expect("euclidean");
    let body = ellipse();
    let cases: Vec<(&str, Result<FinslerMetric>, f64)> = vec![
        ("ball funk+", zoo::funk_ball(2, FunkSign::Plus), 0.5),
        ("ball funk-", zoo::funk_ball(2, FunkSign::Minus), -0.5),
        ("ellipse funk+", zoo::funk(&body, FunkSign::Plus), 0.5),
        ("ellipse funk-", zoo::funk(&body, FunkSign::Minus), -0.5),
    ];
    cases
        .into_iter()
        .map(|(label, m, mu)| {
            let v = m
                .map(|m| funk_condition_residual(&m, mu, &e, 50))
                .unwrap_or(f64::INFINITY);
            Check::below(format!("{label} mu = {mu}"), v, 1e-8)
        })
        .collect()
}

fn projective_factor_and_xi() -> Vec<Check> {
    let e = zoo::euclidean(2).expect("euclidean");
    let fp = zoo::funk_ball(2, FunkSign::Plus).expect("funk+");
    let fm = zoo::funk_ball(2, FunkSign::Minus).expect("funk-");
    let h = zoo::hilbert_ball(2).expect("hilbert");
    let pts = default_samples(&fp, 30);
    let rel = |v: f64, expect: f64, scale: f64| (v - expect).abs() / scale;
    let funk = |m: &FinslerMetric, sign: f64| {
        let p = worst_over(&pts, |(x, y)| {
            let f = m.eval(x, y)?;
            Ok(rel(projective_factor(&e, m, x, y)?.p, sign * 0.5 * f, f))
        });
        let xi = worst_over(&pts, |(x, y)| {
            let f = m.eval(x, y)?;
            Ok(rel(xi_and_tau(&e, m, x, y)?.xi, -0.25 * f * f, f * f))
        });
        (p, xi)
    };
    let (pp, xp) = funk(&fp, 1.0);
    let (pm, xm) = funk(&fm, -1.0);
    let ph = worst_over(&pts, |(x, y)| {
        let (a, b, f) = (fp.eval(x, y)?, fm.eval(x, y)?, h.eval(x, y)?);
        Ok(rel(projective_factor(&e, &h, x, y)?.p, 0.5 * (a - b), f))
    });
    let xh = worst_over(&pts, |(x, y)| {
        let f = h.eval(x, y)?;
        Ok(rel(xi_and_tau(&e, &h, x, y)?.xi, -f * f, f * f))
    });
    vec![
        Check::below("funk+ P = F/2", pp, 1e-7),
        Check::below("funk+ xi = -F^2/4", xp, 1e-7),
        Check::below("funk- P = -F/2", pm, 1e-7),
        Check::below("funk- xi = -F^2/4", xm, 1e-7),
        Check::below("hilbert P = (F+ - F-)/2", ph, 1e-7),
        Check::below("hilbert xi = -F^2", xh, 1e-7),
    ]
}

fn curvature_transform() -> Vec<Check> {
    let pairs: Vec<(&str, FinslerMetric, FinslerMetric)> = vec![
        (
            "funk+",
            zoo::euclidean(2).expect("e"),
            zoo::funk_ball(2, FunkSign::Plus).expect("f"),
        ),
        (
            "funk- 3d",
            zoo::euclidean(3).expect("e"),
            zoo::funk_ball(3, FunkSign::Minus).expect("f"),
        ),
        ("klein", zoo::euclidean(2).expect("e"), zoo::klein(2).expect("k")),
        ("klein 3d", zoo::euclidean(3).expect("e"), zoo::klein(3).expect("k")),
    ];
    let mut checks = Vec::new();
    for (label, base, cand) in pairs {
        let n = base.dim();
        let pts = default_samples(&cand, 20);
        let u_seq = Halton::new(n, 211);
        let items: Vec<(usize, &(Vec<f64>, Vec<f64>))> = pts.iter().enumerate().collect();
        let results: Vec<(f64, f64)> = items
            .par_iter()
            .map(|(i, (x, y))| {
                let u: Vec<f64> = u_seq.point(*i as u64 + 1).iter().map(|t| 2.0 * t - 1.0).collect();
                match curvature_transform_check(&base, &cand, x, y, &u) {
                    Ok(c) => (c.curvature_defect, c.ricci_defect),
                    Err(_) => (f64::INFINITY, f64::INFINITY),
                }
            })
            .collect();
        checks.push(Check::below(
            format!("{label} curvature transform"),
            max_of(results.iter().map(|r| r.0)),
            1e-6,
        ));
        checks.push(Check::below(
            format!("{label} ricci trace"),
            max_of(results.iter().map(|r| r.1)),
            1e-6,
        ));
    }
    checks
}

/// Sign pairs `(lambda, lambda~)` in row-major order.
pub fn sign_pairs() -> Vec<(f64, f64)> {
    let s = [-1.0, 0.0, 1.0];
    s.iter().flat_map(|&l| s.iter().map(move |&lt| (l, lt))).collect()
}

const ODE_A: [f64; 5] = [0.3, 0.7, 1.0, 1.6, 2.5];
const ODE_B: [f64; 5] = [-1.5, -0.5, 0.0, 0.5, 1.5];

/// Window `[0.9 max(t_lo, -T), 0.9 min(t_hi, T)]` used for sampling solutions.
pub fn comparison_window(sol: &ComparisonSolution, t_cap: f64) -> (f64, f64) {
    (0.9 * sol.interval.0.max(-t_cap), 0.9 * sol.interval.1.min(t_cap))
}

/// `(ode residual, numeric deviation, implicit-time deviation)` for one case.
pub fn comparison_defects(lambda: f64, lambda_tilde: f64, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let case = make_case(lambda, lambda_tilde, a, b)?;
    let sol = closed_form(&case);
    let (lo, hi) = comparison_window(&sol, 3.0);
    let ts: Vec<f64> = (0..=40)
        .map(|k| (lo + (hi - lo) * k as f64 / 40.0).clamp(lo, hi))
        .collect();

    let mut ode: f64 = 0.0;
    for &t in &ts {
        let [f, _, fpp] = sol.f_derivatives(t);
        let scale = 1.0 + fpp.abs() + f.abs() + (lambda_tilde / f.powi(3)).abs();
        ode = ode.max(sol.ode_residual(t) / scale);
    }

    let num = numeric_integrate(&case, (lo, hi), 1e-13)?;
    let mut numeric: f64 = 0.0;
    for &t in &ts {
        let (f, _) = num
            .eval(t)
            .ok_or_else(|| crate::Error::Numeric(format!("integration stopped before t = {t}")))?;
        let exact = sol.f(t);
        numeric = numeric.max((f - exact).abs() / exact.max(1.0));
    }

    let mut implicit: f64 = 0.0;
    if !sol.is_constant() {
        for dir in [1.0, -1.0] {
            let (s_lo, s_hi) = monotone_segment(&sol, dir);
            let end = if dir > 0.0 { s_hi.min(3.0) } else { s_lo.max(-3.0) };
            for frac in [0.25, 0.5, 0.75] {
                let t = frac * end;
                if t == 0.0 {
                    continue;
                }
                implicit = implicit.max((implicit_time(&sol, t)? - t.abs()).abs());
            }
        }
    }
    Ok((ode, numeric, implicit))
}

fn comparison_equation() -> Vec<Check> {
    let mut cells = Vec::new();
    for (l, lt) in sign_pairs() {
        for a in ODE_A {
            for b in ODE_B {
                cells.push((l, lt, a, b));
            }
        }
    }
    let results: Vec<Result<(f64, f64, f64)>> = cells
        .par_iter()
        .map(|&(l, lt, a, b)| comparison_defects(l, lt, a, b))
        .collect();
    let failures = results.iter().filter(|r| r.is_err()).count();
    let ok: Vec<(f64, f64, f64)> = results.into_iter().filter_map(|r| r.ok()).collect();
    vec![
        Check::count("cells without a solution", failures),
        Check::below("closed form ODE residual", max_of(ok.iter().map(|r| r.0)), 1e-10),
        Check::below("numeric vs closed form", max_of(ok.iter().map(|r| r.1)), 1e-8),
        Check::below("implicit integral time", max_of(ok.iter().map(|r| r.2)), 1e-7),
    ]
}

/// `∫ F_S(x + t y, y) dt` over the whole line.
pub fn spherical_line_length(x: &[f64], y: &[f64]) -> Result<f64> {
    let m = zoo::spherical(x.len())?;
    let q = quadrature::integrate(
        |t| {
            let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + t * b).collect();
            m.eval_unchecked(&p, y)
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        1e-12,
        1e-12,
    );
    Ok(q.value)
}

fn length_laws() -> Vec<Check> {
    let pairs = [(1.0, 0.0), (0.5, 1.0), (2.0, -0.7), (1.3, 2.5), (0.4, -3.0)];
    let windows = [-2.1, -0.4, 0.0, 1.3, 7.9];
    let mut window_dev: f64 = 0.0;
    let mut total_dev: f64 = 0.0;
    let mut failures = 0;
    for &(a, b) in &pairs {
        let sol = closed_form(&make_case(1.0, 1.0, a, b).expect("valid"));
        for &r in &windows {
            window_dev = window_dev.max((sol.length_between(r, r + PI) - PI).abs());
        }
        let sol = closed_form(&make_case(0.0, 1.0, a, b).expect("valid"));
        match (sol.length_forward, sol.length_backward) {
            (LengthClass::Finite { value: f }, LengthClass::Finite { value: g }) => {
                total_dev = total_dev.max((f + g - PI).abs());
            }
            _ => failures += 1,
        }
    }
    let seq = Halton::new(4, 307);
    let lines: Vec<(Vec<f64>, Vec<f64>)> = (1..=10)
        .map(|k| {
            let u = seq.point(k);
            let x = vec![4.0 * u[0] - 2.0, 4.0 * u[1] - 2.0];
            let th = 2.0 * PI * u[2];
            let r = 0.5 + u[3];
            (x, vec![r * th.cos(), r * th.sin()])
        })
        .collect();
    let line_dev = worst_over(&lines, |(x, y)| Ok((spherical_line_length(x, y)? - PI).abs()));
    vec![
        Check::below("window integral (1, 1)", window_dev, 1e-9),
        Check::count("(0, 1) lengths classified finite", failures),
        Check::below("total length (0, 1)", total_dev, 1e-9),
        Check::below("spherical line length", line_dev, 1e-8),
    ]
}

/// `t` grid across `0.9` of the chord of `x + t y` through the unit ball.
fn ball_grid(body: &ConvexBody, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let fwd = body.exit_parameter(x, y)?;
    let back: Vec<f64> = y.iter().map(|v| -v).collect();
    let bwd = body.exit_parameter(x, &back)?;
    Ok((0..=20).map(|k| 0.9 * (-bwd + (fwd + bwd) * k as f64 / 20.0)).collect())
}

/// Interior points with Euclidean-unit directions inside `body`.
fn unit_samples(m: &FinslerMetric, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    default_samples(m, count)
        .into_iter()
        .map(|(x, y)| {
            let l = norm(&y);
            (x, y.into_iter().map(|v| v / l).collect())
        })
        .collect()
}

fn evolution_laws() -> Vec<Check> {
    let ball = ConvexBody::unit_ball(2);
    let body = ellipse();
    let sources: Vec<(&str, EvolutionSource, ConvexBody, f64)> = vec![
        ("klein", EvolutionSource::Klein { dim: 2 }, ball.clone(), 1e-10),
        (
            "ball funk+",
            EvolutionSource::FunkPlus { dim: 2, body: None },
            ball.clone(),
            1e-10,
        ),
        (
            "ball funk-",
            EvolutionSource::FunkMinus { dim: 2, body: None },
            ball.clone(),
            1e-10,
        ),
        (
            "ellipse funk+",
            EvolutionSource::FunkPlus {
                dim: 2,
                body: Some(body.clone()),
            },
            body.clone(),
            1e-8,
        ),
        (
            "ellipse funk-",
            EvolutionSource::FunkMinus {
                dim: 2,
                body: Some(body.clone()),
            },
            body.clone(),
            1e-8,
        ),
        (
            "ball hilbert",
            EvolutionSource::Hilbert { dim: 2, body: None },
            ball.clone(),
            1e-8,
        ),
        (
            "ellipse hilbert",
            EvolutionSource::Hilbert {
                dim: 2,
                body: Some(body.clone()),
            },
            body,
            1e-8,
        ),
    ];
    let mut checks = Vec::new();
    for (label, source, chord_body, tol) in sources {
        let m = source.metric().expect("zoo metric");
        let pts = unit_samples(&m, 20);
        let dev = worst_over(&pts, |(x, y)| {
            let grid = ball_grid(&chord_body, x, y)?;
            zoo::verify_evolution(&source, x, y, &grid)
        });
        checks.push(Check::below(format!("{label} evolution"), dev, tol));
    }
    let source = EvolutionSource::Spherical { dim: 2 };
    let m = source.metric().expect("spherical");
    let pts = unit_samples(&m, 20);
    let grid: Vec<f64> = (0..=40).map(|k| -5.0 + 0.25 * k as f64).collect();
    let dev = worst_over(&pts, |(x, y)| zoo::verify_evolution(&source, x, y, &grid));
    checks.push(Check::below("spherical evolution", dev, 1e-8));
    checks
}

/// Largest deviation of `1/2 F_±(c'(t))` along unit-speed Klein geodesics
/// from `1 / (e^{∓2t}(a^2 - 1) + 1)`.
pub fn hilbert_funk_family_deviation(count: usize) -> Result<f64> {
    let k = zoo::klein(2)?;
    let fp = zoo::funk_ball(2, FunkSign::Plus)?;
    let fm = zoo::funk_ball(2, FunkSign::Minus)?;
    let starts = default_samples(&k, count);
    let devs: Vec<Result<f64>> = starts
        .par_iter()
        .map(|(x, y)| {
            let path = integrate_geodesic(&k, x, y, (-2.0, 2.0), 1e-11)?;
            let (x0, v0) = path.eval(0.0).expect("t = 0 on path");
            let mut worst: f64 = 0.0;
            for (m, sign) in [(&fp, 1.0), (&fm, -1.0)] {
                let a2 = 1.0 / (0.5 * m.eval(&x0, &v0)?);
                for j in 0..=40 {
                    let t = -2.0 + 0.1 * j as f64;
                    if t <= path.t_min || t >= path.t_max {
                        continue;
                    }
                    let (xt, vt) = path.eval(t).expect("inside path");
                    let got = 0.5 * m.eval(&xt, &vt)?;
                    let expect = 1.0 / ((-sign * 2.0 * t).exp() * (a2 - 1.0) + 1.0);
                    worst = worst.max((got - expect).abs() / expect);
                }
            }
            Ok(worst)
        })
        .collect();
    devs.into_iter().try_fold(0.0, |acc: f64, d| Ok(acc.max(d?)))
}

fn rigidity_taxonomy() -> Vec<Check> {
    let a_vals = a_grid();
    let b_vals = b_grid();
    let mut errors = 0;
    let mut bi_mismatch = 0;
    let mut plus_mismatch = 0;
    let mut minus_mismatch = 0;
    let mut flat_mismatch = 0;
    for &a in &a_vals {
        for &b in &b_vals {
            match classify_completeness(-1.0, -1.0, a, b) {
                Ok(t) => {
                    let rigid = a == 1.0 && b == 0.0;
                    bi_mismatch += usize::from(t.bi_complete != rigid);
                    let plus = t.families.contains(&ExceptionalFamily::PlusF);
                    let minus = t.families.contains(&ExceptionalFamily::MinusF);
                    plus_mismatch += usize::from(t.forward_pair_complete != plus);
                    minus_mismatch += usize::from(t.backward_pair_complete != minus);
                }
                Err(_) => errors += 1,
            }
            match classify_completeness(0.0, 0.0, a, b) {
                Ok(t) => {
                    let constant = t.families.contains(&ExceptionalFamily::ConstantRatio);
                    flat_mismatch += usize::from(t.bi_complete != (b == 0.0) || constant != (b == 0.0));
                }
                Err(_) => errors += 1,
            }
        }
    }
    vec![
        Check::count("unclassified cells", errors),
        Check::count("(-1, -1) bi-complete cells other than (1, 0)", bi_mismatch),
        Check::count("(-1, -1) forward-complete cells outside the +F family", plus_mismatch),
        Check::count("(-1, -1) backward-complete cells outside the -F family", minus_mismatch),
        Check::count("(0, 0) bi-complete iff b = 0 with constant ratio", flat_mismatch),
        Check::from_result(
            "funk evolution along hilbert geodesics",
            hilbert_funk_family_deviation(5),
            1e-7,
        ),
    ]
}

/// Metrics covered by the derivative checks (all zoo members in dimension 2).
pub fn zoo_catalog() -> Vec<FinslerMetric> {
    let body = ellipse();
    let mut out = Vec::new();
    for name in [
        "euclidean",
        "klein",
        "funk+",
        "funk-",
        "hilbert-ball",
        "spherical",
        "bryant",
        "paraboloid",
    ] {
        out.push(zoo::by_name(name, 2, 0.5, None).expect("zoo metric"));
    }
    out.push(zoo::funk(&body, FunkSign::Plus).expect("funk body"));
    out.push(zoo::funk(&body, FunkSign::Minus).expect("funk body"));
    out.push(zoo::hilbert_general(&body).expect("hilbert body"));
    out
}

/// Multi-indices over `vars` variables with total degree `1..=max_degree`.
fn multi_indices(vars: usize, max_degree: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut idx = vec![0u8; vars];
    loop {
        let deg: usize = idx.iter().map(|&e| e as usize).sum();
        if (1..=max_degree).contains(&deg) {
            out.push(idx.clone());
        }
        let mut slot = 0;
        loop {
            if slot == vars {
                return out;
            }
            idx[slot] += 1;
            if (idx[slot] as usize) <= max_degree {
                break;
            }
            idx[slot] = 0;
            slot += 1;
        }
    }
}

/// Normwise relative error of finite differences against jets for all
/// derivatives of `F^2` of order 1 to 3: per order, `max |jet - fd|` over the
/// larger of `|F^2|` and the largest `|jet|` of that order.
pub fn jet_fd_defect(m: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    let jet = m.jet_at(x, y, 3)?;
    let f2 = &jet * &jet;
    let f = |xs: &[f64], ys: &[f64]| {
        let v = m.eval_unchecked(xs, ys);
        v * v
    };
    let mut err = [0.0f64; 4];
    let mut scale = [f2.value().abs(); 4];
    for idx in multi_indices(2 * x.len(), 3) {
        let order: usize = idx.iter().map(|&e| e as usize).sum();
        let exact = f2.derivative(&idx)?;
        let fd = fd_oracle(f, x, y, &idx)?;
        err[order] = err[order].max((exact - fd).abs());
        scale[order] = scale[order].max(exact.abs());
    }
    Ok((1..=3).map(|k| err[k] / scale[k]).fold(0.0, f64::max))
}

/// `R^i_k` rebuilt from finite differences of the spray values, compared with
/// the jet computation relative to `max(max |R|, F^2)`.
pub fn riemann_fd_defect(m: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    let exact = curvature_core(m, x, y)?;
    let settings = FdSettings::default();
    let spray =
        |i: usize| move |xs: &[f64], ys: &[f64]| spray_coefficients(m, xs, ys).map(|g| g[i]).unwrap_or(f64::NAN);
    let unit = |a: usize| {
        let mut idx = vec![0u8; 2 * n];
        idx[a] += 1;
        idx
    };
    let pair = |a: usize, b: usize| {
        let mut idx = vec![0u8; 2 * n];
        idx[a] += 1;
        idx[b] += 1;
        idx
    };
    let g0 = spray_coefficients(m, x, y)?;
    let mut dgy = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            dgy[i][k] = fd_oracle_with(spray(i), x, y, &unit(n + k), &settings)?;
        }
    }
    let mut worst: f64 = 0.0;
    let mut scale = exact.f * exact.f;
    for row in &exact.r_matrix {
        for v in row {
            scale = scale.max(v.abs());
        }
    }
    for i in 0..n {
        for k in 0..n {
            let mut r = 2.0 * fd_oracle_with(spray(i), x, y, &unit(k), &settings)?;
            for j in 0..n {
                r -= fd_oracle_with(spray(i), x, y, &pair(j, n + k), &settings)? * y[j];
                r += 2.0 * g0[j] * fd_oracle_with(spray(i), x, y, &pair(n + j, n + k), &settings)?;
                r -= dgy[i][j] * dgy[j][k];
            }
            worst = worst.max((r - exact.r_matrix[i][k]).abs() / scale);
        }
    }
    Ok(worst)
}

fn derivative_integrity() -> Vec<Check> {
    let mut checks = Vec::new();
    for m in zoo_catalog() {
        let pts = default_samples(&m, 100);
        let short = pts.len() < 100;
        let jet = if short {
            f64::INFINITY
        } else {
            worst_over(&pts, |(x, y)| jet_fd_defect(&m, x, y))
        };
        checks.push(Check::below(format!("{} F^2 jets vs fd", m.name()), jet, 1e-6));
        let r = worst_over(&pts[..pts.len().min(20)], |(x, y)| riemann_fd_defect(&m, x, y));
        checks.push(Check::below(format!("{} R vs fd", m.name()), r, 1e-4));
    }
    checks
}
