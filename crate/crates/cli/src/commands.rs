use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use finsler_core::acceptance::{self, CriterionReport};
use finsler_core::comparison::{
    classify_completeness, closed_form, make_case, numeric_integrate, ClosedFormKind, LengthClass, NumericSummary,
    Taxonomy,
};
use finsler_core::geometry::{integrate_geodesic, riemann_curvature_with_flags, ExitReason};
use finsler_core::linalg::symmetric_eigenvalues;
use finsler_core::projective::{projective_report, ProjectiveReport};
use finsler_core::sampling::{tangent_samples, Halton, SampleBox, DEFAULT_OFFSET};
use finsler_core::zoo::{self, ConvexBody};
use finsler_core::FinslerMetric;

use crate::config::Settings;
use crate::failure::Failure;

/// Tolerance of the curvature assertion when `--tol` is absent.
const CURVATURE_TOL: f64 = 1e-5;

/// The command's payload and whether its checked property holds.
pub struct Outcome {
    pub passed: bool,
    pub message: String,
}

fn metric(name: &str, s: &Settings) -> Result<FinslerMetric, Failure> {
    let dim = s.dim.unwrap_or(2);
    let body = match &s.body {
        Some(axes) => {
            if axes.0.len() != dim {
                return Err(Failure::Usage(format!(
                    "body has {} semi-axes, dimension is {dim}",
                    axes.0.len()
                )));
            }
            Some(ConvexBody::ellipsoid(&axes.0)?)
        }
        None => None,
    };
    zoo::by_name(name, dim, s.eps.unwrap_or(0.5), body.as_ref())
        .map_err(|e| Failure::Usage(format!("{e}; known metrics: {}", zoo::METRIC_NAMES.join(", "))))
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    v.as_ref()
        .ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn sample_box(m: &FinslerMetric, s: &Settings) -> Result<SampleBox, Failure> {
    match s.sample_box {
        Some((lo, hi)) if lo < hi => Ok(SampleBox::cube(m.dim(), lo, hi)),
        Some((lo, hi)) => Err(Failure::Usage(format!("empty box {lo},{hi}"))),
        None => Ok(m.sample_box().clone()),
    }
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Infinite values as the strings `"inf"` and `"-inf"`, which JSON lacks.
fn extended(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x > 0.0 {
        serde_json::json!("inf")
    } else if x < 0.0 {
        serde_json::json!("-inf")
    } else {
        serde_json::json!("nan")
    }
}

fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct CurvatureRow {
    x: Vec<f64>,
    y: Vec<f64>,
    k_min: f64,
    k_max: f64,
    /// `Ric / ((n - 1) F^2)`.
    ricci_k: f64,
    g_min_eigenvalue: f64,
}

#[derive(Serialize)]
struct CurvatureReport {
    metric: String,
    dim: usize,
    samples: usize,
    flags_per_sample: usize,
    /// Constant checked against: `--lambda`, else the declared one.
    lambda: Option<f64>,
    k_min: f64,
    k_max: f64,
    max_k_spread: f64,
    /// `max |Ric - (n - 1) lambda F^2| / F^2`; against `lambda = 0` when no
    /// constant is known.
    einstein_residual: f64,
    /// `max |K - lambda|` over all flags.
    flag_residual: Option<f64>,
    min_g_eigenvalue: f64,
    tolerance: f64,
    /// `None` for experiments (no constant known).
    passed: Option<bool>,
    per_sample: Vec<CurvatureRow>,
}

/// Flag vectors from a Halton sequence in `[-1, 1]^n`.
fn halton_flags(dim: usize, count: usize, offset: u64) -> Vec<Vec<f64>> {
    Halton::new(dim, offset)
        .take(count)
        .map(|u| u.iter().map(|c| 2.0 * c - 1.0).collect())
        .collect()
}

pub fn curvature(s: &Settings) -> Result<Outcome, Failure> {
    let name = required(&s.metric, "metric")?;
    let m = metric(name, s)?;
    let n = m.dim();
    if n < 2 {
        return Err(Failure::Usage("flag curvature needs dimension at least 2".into()));
    }
    let bbox = sample_box(&m, s)?;
    let count = s.samples.unwrap_or(50);
    let offset = s.offset.unwrap_or(DEFAULT_OFFSET);
    let pts = tangent_samples(&m, &bbox, count, offset);
    if pts.is_empty() {
        return Err(Failure::Usage("sample box misses the metric domain".into()));
    }
    let flags = halton_flags(n, s.flags.unwrap_or(20), offset + 1);
    let lambda = s.lambda.or(m.einstein_constant());
    let rows: Vec<CurvatureRow> = pts
        .par_iter()
        .map(|(x, y)| {
            let sample = riemann_curvature_with_flags(&m, x, y, &[])?;
            // Flags nearly parallel to the flagpole are skipped.
            let ks: Vec<f64> = flags.iter().filter_map(|v| sample.flag_curvature(v).ok()).collect();
            let f2 = sample.f * sample.f;
            Ok(CurvatureRow {
                x: x.clone(),
                y: y.clone(),
                k_min: ks.iter().copied().fold(f64::INFINITY, f64::min),
                k_max: ks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ricci_k: sample.ricci / ((n as f64 - 1.0) * f2),
                g_min_eigenvalue: symmetric_eigenvalues(&sample.g)[0],
            })
        })
        .collect::<Result<_, finsler_core::Error>>()?;
    if rows.iter().any(|r| !r.k_min.is_finite()) {
        return Err(Failure::Numeric("no usable flag at some sample".into()));
    }
    let l = lambda.unwrap_or(0.0);
    let tolerance = s.tol.unwrap_or(CURVATURE_TOL);
    let flag_residual = lambda.map(|l| {
        rows.iter()
            .map(|r| (r.k_min - l).abs().max((r.k_max - l).abs()))
            .fold(0.0, f64::max)
    });
    let einstein_residual = rows
        .iter()
        .map(|r| (r.ricci_k - l).abs() * (n as f64 - 1.0))
        .fold(0.0, f64::max);
    let passed = flag_residual.map(|fr| fr < tolerance && einstein_residual < tolerance);
    let report = CurvatureReport {
        metric: m.name().to_string(),
        dim: n,
        samples: rows.len(),
        flags_per_sample: flags.len(),
        lambda,
        k_min: rows.iter().map(|r| r.k_min).fold(f64::INFINITY, f64::min),
        k_max: rows.iter().map(|r| r.k_max).fold(f64::NEG_INFINITY, f64::max),
        max_k_spread: rows.iter().map(|r| r.k_max - r.k_min).fold(0.0, f64::max),
        einstein_residual,
        flag_residual,
        min_g_eigenvalue: rows.iter().map(|r| r.g_min_eigenvalue).fold(f64::INFINITY, f64::min),
        tolerance,
        passed,
        per_sample: rows,
    };
    emit(s.out.as_deref(), &json(&report))?;
    Ok(Outcome {
        passed: report.passed.unwrap_or(true),
        message: match lambda {
            Some(l) => format!("curvature residual {einstein_residual:.3e} against lambda {l} (tol {tolerance:.1e})"),
            None => format!(
                "no curvature constant known; K ranges over [{:.6}, {:.6}]",
                report.k_min, report.k_max
            ),
        },
    })
}

#[derive(Serialize)]
struct ProjectiveOutput {
    rapcsak_residual: f64,
    fitted_lambda: f64,
    fitted_lambda_tilde: f64,
    /// Residual of `Xi = lambda~ F~^2 - lambda F^2` at the supplied or
    /// declared constants, else at the fitted ones.
    xi_relation_residual: f64,
    #[serde(flatten)]
    report: ProjectiveReport,
}

pub fn projective(s: &Settings) -> Result<Outcome, Failure> {
    let base = metric(s.base.as_deref().unwrap_or("euclidean"), s)?;
    let cand = metric(required(&s.cand, "cand")?, s)?;
    let constants = match (s.lambda, s.lambdat) {
        (Some(l), Some(lt)) => Some((l, lt)),
        (None, None) => None,
        _ => return Err(Failure::Usage("--lambda and --lambdat go together".into())),
    };
    let report = projective_report(&base, &cand, s.samples.unwrap_or(50), constants)?;
    let out = ProjectiveOutput {
        rapcsak_residual: report.rapcsak_residual_max,
        fitted_lambda: report.fit.lambda,
        fitted_lambda_tilde: report.fit.lambda_tilde,
        xi_relation_residual: report.einstein_relation_residual_max.unwrap_or(report.fit.misfit),
        report,
    };
    emit(s.out.as_deref(), &json(&out))?;
    Ok(Outcome {
        passed: out.report.related,
        message: format!("Rapcsak residual {:.3e}", out.rapcsak_residual),
    })
}

fn exit_label(e: ExitReason) -> &'static str {
    match e {
        ExitReason::Boundary => "boundary",
        ExitReason::BlowUp => "blow-up",
        ExitReason::TLimit => "time limit",
    }
}

pub fn geodesic(s: &Settings) -> Result<Outcome, Failure> {
    let m = metric(required(&s.metric, "metric")?, s)?;
    let n = m.dim();
    let x0 = s.x0.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| vec![0.0; n]);
    let y0 = s.y0.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        e
    });
    let path = integrate_geodesic(&m, &x0, &y0, s.tspan.unwrap_or((-1.0, 1.0)), s.tol.unwrap_or(1e-10))?;
    let mut text = String::from("t");
    for i in 1..=n {
        write!(text, ",x{i}").unwrap();
    }
    for i in 1..=n {
        write!(text, ",v{i}").unwrap();
    }
    text.push_str(",f_speed\n");
    for p in &path.samples {
        let mut cols = vec![csv_number(p.t)];
        cols.extend(p.x.iter().chain(&p.v).map(|c| csv_number(*c)));
        cols.push(csv_number(m.eval_unchecked(&p.x, &p.v)));
        text.push_str(&cols.join(","));
        text.push('\n');
    }
    emit(s.out.as_deref(), &text)?;
    Ok(Outcome {
        passed: true,
        message: format!(
            "geodesic on [{}, {}], backward exit: {}, forward exit: {}",
            path.t_min,
            path.t_max,
            exit_label(path.exit_backward),
            exit_label(path.exit_forward)
        ),
    })
}

#[derive(Serialize)]
struct OdeReport {
    c: f64,
    closed_form: ClosedFormKind,
    interval: [serde_json::Value; 2],
    length_forward: LengthClass,
    length_backward: LengthClass,
    taxonomy: Taxonomy,
    numeric: NumericSummary,
    window: [f64; 2],
}

pub fn ode(s: &Settings) -> Result<Outcome, Failure> {
    let l = *required(&s.lambda, "lambda")?;
    let lt = *required(&s.lambdat, "lambdat")?;
    let a = *required(&s.a, "a")?;
    let b = *required(&s.b, "b")?;
    let case = make_case(l, lt, a, b)?;
    let sol = closed_form(&case);
    let taxonomy = classify_completeness(l, lt, a, b)?;
    let (t_lo, t_hi) = sol.interval;
    let (span_lo, span_hi) = s.tspan.unwrap_or((-10.0, 10.0));
    if !(span_lo <= 0.0 && span_hi >= 0.0 && span_lo < span_hi) {
        return Err(Failure::Usage(format!("time span {span_lo},{span_hi} must contain 0")));
    }
    // `f` vanishes at finite interval ends, so the window stops just short.
    let inset = 1e-9 * (span_hi - span_lo);
    let lo = if t_lo > span_lo { t_lo + inset } else { span_lo };
    let hi = if t_hi < span_hi { t_hi - inset } else { span_hi };
    let numeric = numeric_integrate(&case, (lo, hi), s.tol.unwrap_or(1e-10))?;
    let rows = s.samples.unwrap_or(201).max(2);
    let mut csv = String::from("t,f,f_tilde,f_numeric\n");
    for i in 0..rows {
        let t = if i + 1 == rows {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (rows - 1) as f64
        };
        let f = sol.f(t);
        let num = numeric.eval(t).map(|(v, _)| csv_number(v)).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{num}",
            csv_number(t),
            csv_number(f),
            csv_number(1.0 / (f * f))
        )
        .unwrap();
    }
    let report = OdeReport {
        c: case.c,
        closed_form: sol.kind,
        interval: [extended(t_lo), extended(t_hi)],
        length_forward: sol.length_forward,
        length_backward: sol.length_backward,
        taxonomy,
        numeric: numeric.summary(),
        window: [lo, hi],
    };
    emit(s.out.as_deref(), &json(&report))?;
    let csv_path: Option<PathBuf> = s
        .csv
        .clone()
        .or_else(|| s.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(p) = csv_path {
        emit(Some(&p), &csv)?;
    }
    Ok(Outcome {
        passed: true,
        message: format!("{:?} solution on [{t_lo}, {t_hi}]", sol.kind),
    })
}

pub fn verify_all(s: &Settings) -> Result<Outcome, Failure> {
    let reports: Vec<CriterionReport> = acceptance::run_all();
    let mut lines = String::new();
    for r in &reports {
        lines.push_str(&r.summary_line());
        lines.push('\n');
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    match &s.out {
        Some(p) => {
            emit(Some(p), &json(&reports))?;
            eprint!("{lines}");
        }
        None => print!("{lines}"),
    }
    Ok(Outcome {
        passed: passed == reports.len(),
        message: format!("{passed} of {} criteria passed", reports.len()),
    })
}
