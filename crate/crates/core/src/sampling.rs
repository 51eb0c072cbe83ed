//! Deterministic low-discrepancy sampling for reproducible reports.

use crate::metric::FinslerMetric;

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// Halton sequence in `[0, 1)^dim`, starting after `offset` skipped points.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, offset: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton dimension {dim} exceeds {}", PRIMES.len());
        Self { dim, index: offset + 1 }
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        PRIMES[..self.dim].iter().map(|&p| radical_inverse(index, p)).collect()
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        let p = self.point(self.index);
        self.index += 1;
        Some(p)
    }
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn map(&self, u: &[f64]) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(u)
            .map(|((l, h), t)| l + t * (h - l))
            .collect()
    }
}

/// Default Halton offset used by every report.
pub const DEFAULT_OFFSET: u64 = 17;

/// Directions are drawn from `[-1, 1]^n` and rejected below this Euclidean norm.
const MIN_DIRECTION_NORM: f64 = 0.25;

/// `count` deterministic `(x, y)` pairs with `x` in `bbox ∩ domain`.
///
/// Returns fewer pairs only if the domain occupies a tiny fraction of the box.
pub fn tangent_samples(
    metric: &FinslerMetric,
    bbox: &SampleBox,
    count: usize,
    offset: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = metric.dim();
    assert_eq!(bbox.dim(), n, "sample box dimension");
    let mut out = Vec::with_capacity(count);
    let max_draws = 1000 * count.max(1) as u64;
    let seq = Halton::new(2 * n, offset);
    for k in 0..max_draws {
        if out.len() == count {
            break;
        }
        let u = seq.point(offset + 1 + k);
        let x = bbox.map(&u[..n]);
        let y: Vec<f64> = u[n..].iter().map(|t| 2.0 * t - 1.0).collect();
        if crate::linalg::norm(&y) < MIN_DIRECTION_NORM || !metric.contains(&x) {
            continue;
        }
        out.push((x, y));
    }
    out
}
