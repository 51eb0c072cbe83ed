use serde::Serialize;

use super::spray_jets;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, norm};
use crate::metric::FinslerMetric;
use crate::ode::{Dopri5, OdeSystem, RhsFailure, StopReason, Trajectory};

/// Euclidean speed above which integration stops with [`ExitReason::BlowUp`].
pub const BLOW_UP_SPEED: f64 = 1e8;

/// Euclidean distances ahead of a failed step at which the domain is probed.
const BOUNDARY_PROBES: [f64; 4] = [1e-10, 1e-9, 1e-8, 1e-7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitReason {
    Boundary,
    BlowUp,
    TLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// Unit-speed geodesic through `x0` at `t = 0`.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    pub t_min: f64,
    pub t_max: f64,
    pub exit_backward: ExitReason,
    pub exit_forward: ExitReason,
    backward: Trajectory,
    forward: Trajectory,
}

impl GeodesicPath {
    /// `(c(t), c'(t))` by dense output, `None` outside `[t_min, t_max]`.
    pub fn eval(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let traj = if t >= 0.0 { &self.forward } else { &self.backward };
        let s = traj.eval(t)?;
        let n = s.len() / 2;
        Some((s[..n].to_vec(), s[n..].to_vec()))
    }

    /// `max |F(c(t), c'(t)) - 1|` over the accepted steps.
    pub fn max_speed_deviation(&self, m: &FinslerMetric) -> f64 {
        self.samples
            .iter()
            .map(|s| (m.eval_unchecked(&s.x, &s.v) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |c'' + 2 G(c')|` at the accepted steps, with `c''` from the
    /// dense-output derivative.
    pub fn max_geodesic_residual(&self, m: &FinslerMetric) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            let h = 1e-5 * (1.0 + s.t.abs());
            let (Some((_, vp)), Some((_, vm))) = (self.eval(s.t + h), self.eval(s.t - h)) else {
                continue;
            };
            let Ok(sj) = spray_jets(m, &s.x, &s.v, 0) else {
                continue;
            };
            let res: Vec<f64> = (0..s.v.len())
                .map(|i| (vp[i] - vm[i]) / (2.0 * h) + 2.0 * sj.spray[i].value())
                .collect();
            worst = worst.max(max_abs(&res));
        }
        worst
    }
}

struct GeodesicField<'a> {
    m: &'a FinslerMetric,
}

impl OdeSystem for GeodesicField<'_> {
    fn dim(&self) -> usize {
        2 * self.m.dim()
    }
    fn rhs(&self, _t: f64, s: &[f64], ds: &mut [f64]) -> Result<(), RhsFailure> {
        let n = self.m.dim();
        let (x, v) = s.split_at(n);
        if !s.iter().all(|c| c.is_finite()) {
            return Err(RhsFailure);
        }
        let sj = spray_jets(self.m, x, v, 0).map_err(|_| RhsFailure)?;
        ds[..n].copy_from_slice(v);
        for i in 0..n {
            ds[n + i] = -2.0 * sj.spray[i].value();
            if !ds[n + i].is_finite() {
                return Err(RhsFailure);
            }
        }
        Ok(())
    }
}

/// Integrates the geodesic `c'' + 2 G(c') = 0` with `c(0) = x0` and `c'(0)`
/// the unit-speed rescaling of `y0`, over `t_span = (t_lo, t_hi)` with
/// `t_lo <= 0 <= t_hi`.
pub fn integrate_geodesic(
    m: &FinslerMetric,
    x0: &[f64],
    y0: &[f64],
    t_span: (f64, f64),
    tol: f64,
) -> Result<GeodesicPath> {
    let (t_lo, t_hi) = t_span;
    if !(t_lo <= 0.0 && t_hi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time span ({t_lo}, {t_hi}) must contain 0"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let speed = m.eval(x0, y0)?;
    let v0: Vec<f64> = y0.iter().map(|c| c / speed).collect();
    let state0: Vec<f64> = x0.iter().chain(&v0).copied().collect();
    let field = GeodesicField { m };
    // One digit of headroom keeps the speed drift within a small multiple of `tol`.
    let mut solver = Dopri5::new(0.1 * tol);
    solver.h_min = 1e-14;
    let n = m.dim();
    let blow_up = |_t: f64, s: &[f64]| norm(&s[n..]) > BLOW_UP_SPEED;

    let forward = solver.integrate(&field, 0.0, &state0, t_hi, blow_up);
    let backward = solver.integrate(&field, 0.0, &state0, t_lo, blow_up);
    let exit_forward = classify_exit(m, &forward);
    let exit_backward = classify_exit(m, &backward);

    let mut samples: Vec<GeodesicSample> = Vec::new();
    let to_sample = |t: f64, s: &[f64]| GeodesicSample {
        t,
        x: s[..n].to_vec(),
        v: s[n..].to_vec(),
    };
    for (t, s) in backward.times.iter().zip(&backward.states).skip(1).rev() {
        samples.push(to_sample(*t, s));
    }
    for (t, s) in forward.times.iter().zip(&forward.states) {
        samples.push(to_sample(*t, s));
    }
    Ok(GeodesicPath {
        samples,
        t_min: backward.t_end(),
        t_max: forward.t_end(),
        exit_backward,
        exit_forward,
        backward,
        forward,
    })
}

fn classify_exit(m: &FinslerMetric, traj: &Trajectory) -> ExitReason {
    match traj.stop {
        StopReason::Reached => ExitReason::TLimit,
        StopReason::Event | StopReason::MaxSteps => ExitReason::BlowUp,
        StopReason::RhsFailure | StopReason::StepUnderflow => {
            // Evaluation near the boundary loses precision before the boundary
            // itself is crossed (failed stages or error-test underflow), so
            // probe a short way ahead.
            let s = traj.states.last().expect("non-empty trajectory");
            let n = m.dim();
            let (x, v) = s.split_at(n);
            let dir = if traj.t_end() >= traj.t_start() { 1.0 } else { -1.0 };
            let vn = norm(v);
            let exits = BOUNDARY_PROBES.iter().any(|d| {
                let probe: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + dir * d * b / vn).collect();
                !m.contains(&probe)
            });
            if exits {
                ExitReason::Boundary
            } else {
                ExitReason::BlowUp
            }
        }
    }
}
