//! Campaign settings: TOML config file merged under command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use crate::failure::Failure;

/// Every tunable of a campaign. In a config file the same keys may appear at
/// top level or inside a table named after the subcommand; the table wins.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Zoo metric name.
    #[arg(long)]
    pub metric: Option<String>,
    /// Base metric of a projective pair.
    #[arg(long)]
    pub base: Option<String>,
    /// Candidate metric of a projective pair.
    #[arg(long)]
    pub cand: Option<String>,
    /// Deformation parameter of the Bryant metric.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Sample count (curvature, projective) or CSV rows (ode).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Integration tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV output of `ode`; defaults to the `--out` path with extension csv.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Cubic sample box `lo,hi` replacing the metric's own box.
    #[arg(long = "box", value_parser = parse_pair, allow_hyphen_values = true)]
    #[serde(rename = "box")]
    pub sample_box: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub x0: Option<Numbers>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub y0: Option<Numbers>,
    /// Time span `lo,hi` containing 0.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub tspan: Option<(f64, f64)>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambdat: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Dimension of the zoo metrics.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Semi-axes of the ellipsoid body used by the `*-body` metrics.
    #[arg(long, value_parser = parse_list)]
    pub body: Option<Numbers>,
    /// Flags per sample in `curvature`.
    #[arg(long)]
    pub flags: Option<usize>,
    /// Halton offset of the sample sequence.
    #[arg(long)]
    pub offset: Option<u64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Settings {
    /// Fields set in `top` replace those of `self`.
    pub fn overlay(&mut self, top: &Settings) {
        overlay!(self, top; metric, base, cand, eps, samples, tol, out, csv, sample_box, x0, y0, tspan,
            lambda, lambdat, a, b, dim, body, flags, offset);
    }
}

/// Top-level keys mirror [`Settings`]; `serde(flatten)` would lose
/// `deny_unknown_fields`, so they are repeated.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    metric: Option<String>,
    base: Option<String>,
    cand: Option<String>,
    eps: Option<f64>,
    samples: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    #[serde(rename = "box")]
    sample_box: Option<(f64, f64)>,
    x0: Option<Numbers>,
    y0: Option<Numbers>,
    tspan: Option<(f64, f64)>,
    lambda: Option<f64>,
    lambdat: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    dim: Option<usize>,
    body: Option<Numbers>,
    flags: Option<usize>,
    offset: Option<u64>,
    curvature: Option<Settings>,
    projective: Option<Settings>,
    geodesic: Option<Settings>,
    ode: Option<Settings>,
    #[serde(rename = "verify-all")]
    verify_all: Option<Settings>,
}

/// Settings for `command`: config top level, then the command's table, then
/// the command-line flags.
pub fn resolve(config: Option<&Path>, command: &str, flags: &Settings) -> Result<Settings, Failure> {
    let mut s = Settings::default();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let t: ConfigFile =
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))?;
        s = Settings {
            metric: t.metric,
            base: t.base,
            cand: t.cand,
            eps: t.eps,
            samples: t.samples,
            tol: t.tol,
            out: t.out,
            csv: t.csv,
            sample_box: t.sample_box,
            x0: t.x0,
            y0: t.y0,
            tspan: t.tspan,
            lambda: t.lambda,
            lambdat: t.lambdat,
            a: t.a,
            b: t.b,
            dim: t.dim,
            body: t.body,
            flags: t.flags,
            offset: t.offset,
        };
        let table = match command {
            "curvature" => t.curvature,
            "projective" => t.projective,
            "geodesic" => t.geodesic,
            "ode" => t.ode,
            "verify-all" => t.verify_all,
            _ => None,
        };
        if let Some(table) = table {
            s.overlay(&table);
        }
    }
    s.overlay(flags);
    Ok(s)
}

/// Comma-separated numbers on the command line, an array in the config.
/// A newtype so that clap takes the whole list as one value.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Numbers(pub Vec<f64>);

fn split_numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

fn parse_list(s: &str) -> Result<Numbers, String> {
    split_numbers(s).map(Numbers)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match split_numbers(s)?.as_slice() {
        [lo, hi] => Ok((*lo, *hi)),
        other => Err(format!("expected two comma-separated numbers, got {}", other.len())),
    }
}
