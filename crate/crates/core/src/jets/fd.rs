//! Central finite differences with Richardson extrapolation.
//!
//! Kept deliberately independent of the jet machinery: it only ever calls the
//! plain `f64` evaluation of a function.

use super::JetError;

/// Step and extrapolation settings for [`fd_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct FdSettings {
    /// Relative base step per derivative order (index 0 unused).
    pub base_step: [f64; 5],
    /// Ratio above which successive differences are considered non-decreasing.
    pub divergence_ratio: f64,
    /// Number of step scales tried (`1, 1/2, 1/4, ...`); the estimate whose
    /// Richardson levels agree best is returned.
    pub ladder: usize,
}

impl Default for FdSettings {
    fn default() -> Self {
        Self {
            base_step: [0.0, 4e-3, 1e-2, 4e-2, 8e-2],
            divergence_ratio: 0.6,
            ladder: 8,
        }
    }
}

/// Estimates the partial derivative of `f(x, y)` for the multi-index `idx`
/// over the `2n` variables `(x, y)`.
///
/// Uses the tensor product of second-order central difference stencils with
/// step `h_i = s * max(1, |z_i|)` and two levels of Richardson extrapolation
/// (`h`, `h/2`, `h/4`). The base step is shrunk along a halving ladder and the
/// level with the smallest Richardson discrepancy wins, which adapts the step
/// to both rounding noise and nearby domain boundaries.
pub fn fd_oracle<F>(f: F, x: &[f64], y: &[f64], idx: &[u8]) -> Result<f64, JetError>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    fd_oracle_with(f, x, y, idx, &FdSettings::default())
}

pub fn fd_oracle_with<F>(f: F, x: &[f64], y: &[f64], idx: &[u8], settings: &FdSettings) -> Result<f64, JetError>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let n = x.len();
    if idx.len() != 2 * n || y.len() != n {
        return Err(JetError::IndexLength {
            expected: 2 * n,
            got: idx.len(),
        });
    }
    let degree: usize = idx.iter().map(|&e| e as usize).sum();
    if degree > 4 {
        return Err(JetError::DegreeTooHigh { degree, order: 4 });
    }
    let z: Vec<f64> = x.iter().chain(y).copied().collect();
    if degree == 0 {
        let v = f(x, y);
        return if v.is_finite() { Ok(v) } else { Err(JetError::NonFinite) };
    }

    let base = settings.base_step[degree];
    let mut best: Option<(f64, f64)> = None;
    let mut first_err = None;
    let mut scale = 1.0;
    for _ in 0..settings.ladder.max(1) {
        let steps: Vec<f64> = z.iter().map(|v| scale * base * v.abs().max(1.0)).collect();
        match richardson(&f, &z, n, idx, &steps, settings) {
            Ok((value, err)) => {
                if best.is_none_or(|(_, e)| err < e) {
                    best = Some((value, err));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
        scale *= 0.5;
    }
    match (best, first_err) {
        (Some((value, _)), _) => Ok(value),
        (None, Some(e)) => Err(e),
        (None, None) => Err(JetError::NonFinite),
    }
}

/// Assumed relative accuracy of a single function evaluation.
const EVAL_PRECISION: f64 = 1e-14;

/// Extrapolated estimate and the discrepancy between its two Richardson levels.
fn richardson<F>(
    f: &F,
    z: &[f64],
    n: usize,
    idx: &[u8],
    steps: &[f64],
    settings: &FdSettings,
) -> Result<(f64, f64), JetError>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let (e0, _) = stencil(f, z, n, idx, steps, 1.0)?;
    let (e1, _) = stencil(f, z, n, idx, steps, 0.5)?;
    let (e2, mag) = stencil(f, z, n, idx, steps, 0.25)?;

    let d1 = (e1 - e0).abs();
    let d2 = (e2 - e1).abs();
    // `mag` bounds the rounding noise of the finest stencil; the factor 3
    // covers the amplification by the extrapolation. Growth within that noise
    // is not divergence.
    let noise = 3.0 * EVAL_PRECISION * mag;
    if d2 > settings.divergence_ratio * d1 && d2 > 1e-6 * (1.0 + e2.abs()) + 10.0 * noise {
        return Err(JetError::Diverged {
            estimates: vec![e0, e1, e2],
        });
    }
    let r0 = (4.0 * e1 - e0) / 3.0;
    let r1 = (4.0 * e2 - e1) / 3.0;
    Ok(((16.0 * r1 - r0) / 15.0, (r1 - r0).abs() + noise))
}

/// Stencil value and the sum of `|weight * value|` over its nodes.
fn stencil<F>(f: &F, z: &[f64], n: usize, idx: &[u8], steps: &[f64], scale: f64) -> Result<(f64, f64), JetError>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let active: Vec<usize> = (0..idx.len()).filter(|&i| idx[i] > 0).collect();
    let mut counters = vec![0u8; active.len()];
    let mut point = z.to_vec();
    let mut total = 0.0;
    let mut magnitude = 0.0;
    loop {
        let mut weight = 1.0;
        for (slot, &var) in active.iter().enumerate() {
            let k = idx[var];
            let j = counters[slot];
            let h = steps[var] * scale;
            point[var] = z[var] + (k as f64 / 2.0 - j as f64) * h;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            weight *= sign * binomial(k, j) / h.powi(k as i32);
        }
        let v = f(&point[..n], &point[n..]);
        if !v.is_finite() {
            return Err(JetError::NonFinite);
        }
        total += weight * v;
        magnitude += (weight * v).abs();

        let mut slot = 0;
        loop {
            if slot == active.len() {
                return Ok((total, magnitude));
            }
            counters[slot] += 1;
            if counters[slot] <= idx[active[slot]] {
                break;
            }
            counters[slot] = 0;
            slot += 1;
        }
    }
}

fn binomial(k: u8, j: u8) -> f64 {
    let mut r = 1.0;
    for i in 0..j {
        r = r * (k - i) as f64 / (i + 1) as f64;
    }
    r
}
