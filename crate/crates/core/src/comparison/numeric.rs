//! Direct integration of the comparison equation and the implicit
//! first-integral form of its solutions.

use std::f64::consts::PI;

use serde::Serialize;

use super::{Branch, ComparisonCase, ComparisonSolution};
use crate::error::{Error, Result};
use crate::jets::{Jet, JetLayout};
use crate::ode::{Dopri5, OdeSystem, RhsFailure, StopReason, Trajectory};
use crate::quadrature;

/// Integration stops once `f` drops to this level.
pub const F_FLOOR: f64 = 1e-9;

struct ComparisonOde {
    lambda: f64,
    lambda_tilde: f64,
}

impl OdeSystem for ComparisonOde {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), RhsFailure> {
        let f = y[0];
        if !(f > 0.0) {
            return Err(RhsFailure);
        }
        dy[0] = y[1];
        dy[1] = -self.lambda * f + self.lambda_tilde / (f * f * f);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NumericSolution {
    pub forward: Trajectory,
    pub backward: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericSummary {
    pub t_min: f64,
    pub t_max: f64,
    pub stop_forward: StopReason,
    pub stop_backward: StopReason,
}

impl NumericSolution {
    /// `(f, f')` at `t` from the dense output.
    pub fn eval(&self, t: f64) -> Option<(f64, f64)> {
        let traj = if t >= 0.0 { &self.forward } else { &self.backward };
        traj.eval(t).map(|s| (s[0], s[1]))
    }

    pub fn summary(&self) -> NumericSummary {
        NumericSummary {
            t_min: self.backward.t_end(),
            t_max: self.forward.t_end(),
            stop_forward: self.forward.stop,
            stop_backward: self.backward.stop,
        }
    }
}

/// Integrates `(f, f')` from `(a, b)` at `t = 0` over `t_span` (containing
/// 0), stopping when `f <= F_FLOOR`.
pub fn numeric_integrate(case: &ComparisonCase, t_span: (f64, f64), tol: f64) -> Result<NumericSolution> {
    let (lo, hi) = t_span;
    if !(lo <= 0.0 && hi >= 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time span ({lo}, {hi}) must be finite and contain 0"
        )));
    }
    let sys = ComparisonOde {
        lambda: case.lambda,
        lambda_tilde: case.lambda_tilde,
    };
    let solver = Dopri5::new(tol);
    let y0 = [case.a, case.b];
    let stop = |_t: f64, y: &[f64]| y[0] <= F_FLOOR;
    Ok(NumericSolution {
        forward: solver.integrate(&sys, 0.0, &y0, hi, stop),
        backward: solver.integrate(&sys, 0.0, &y0, lo, stop),
    })
}

impl ComparisonSolution {
    /// `[f, f', f'']` at `t`, exact through a univariate jet.
    pub fn f_derivatives(&self, t: f64) -> [f64; 3] {
        let layout = JetLayout::get(1, 2);
        let f = self.f_generic(Jet::variable(&layout, 0, t));
        [f.value(), f.d1(0), f.d2(0, 0)]
    }

    /// `|f'' + lambda f - lambda~ / f^3|` of the explicit solution.
    pub fn ode_residual(&self, t: f64) -> f64 {
        let [f, _, fpp] = self.f_derivatives(t);
        (fpp + self.case.lambda * f - self.case.lambda_tilde / f.powi(3)).abs()
    }

    /// Times in the maximal interval where `f' = 0`, sorted.
    pub fn turning_points(&self) -> Vec<f64> {
        let (lo, hi) = self.interval;
        let mut out = Vec::new();
        match self.branch {
            Branch::Trig { r, theta, .. } => {
                if r == 0.0 {
                    return out;
                }
                // 2t + theta = pi/2 + k pi
                let first = ((2.0 * lo.max(-1e3) + theta - PI / 2.0) / PI).ceil();
                let mut k = first;
                loop {
                    let t = (PI / 2.0 + k * PI - theta) / 2.0;
                    if t >= hi || t > 1e3 {
                        break;
                    }
                    if t > lo {
                        out.push(t);
                    }
                    k += 1.0;
                }
            }
            Branch::Poly { q, ab, .. } => {
                if q != 0.0 {
                    out.push(-ab / q);
                }
            }
            Branch::Hyper { p, q, .. } => {
                if p != 0.0 && q != 0.0 && q / p > 0.0 {
                    out.push(0.25 * (q / p).ln());
                }
            }
        }
        out.retain(|t| *t > lo && *t < hi);
        out
    }
}

/// Maximal interval around 0 on which `f` is strictly monotone; when `b = 0`
/// the side is chosen by `dir` (`+1` forward, `-1` backward).
pub fn monotone_segment(sol: &ComparisonSolution, dir: f64) -> (f64, f64) {
    let (mut lo, mut hi) = sol.interval;
    for t in sol.turning_points() {
        let tol = 1e-13 * (1.0 + t.abs());
        if t.abs() <= tol {
            if dir >= 0.0 {
                lo = lo.max(0.0);
            } else {
                hi = hi.min(0.0);
            }
        } else if t < 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
    }
    (lo, hi)
}

/// `|∫_a^{f(t)} s ds / sqrt(-lambda s^4 + 2 C s^2 - lambda~)|`, which equals
/// `|t|` on a monotone segment of `f`.
pub fn implicit_time(sol: &ComparisonSolution, t: f64) -> Result<f64> {
    let dir = if t >= 0.0 { 1.0 } else { -1.0 };
    let (lo, hi) = monotone_segment(sol, dir);
    if !(t >= lo && t <= hi) {
        return Err(Error::InvalidParameter(format!(
            "t = {t} outside the monotone segment ({lo}, {hi})"
        )));
    }
    let ComparisonCase {
        lambda: l,
        lambda_tilde: lt,
        a,
        c,
        ..
    } = sol.case;
    let end = sol.f(t);
    let (s0, s1) = if end >= a { (a, end) } else { (end, a) };
    if s1 == s0 {
        return Ok(0.0);
    }
    // s = s0 + (s1 - s0)(1 - cos th)/2 absorbs square-root endpoint
    // singularities. Near each endpoint e the radicand is expanded as
    // rad(e) + (s - e)(s + e)(2C - lambda (s^2 + e^2)), with s - e formed
    // from half-angle sines so that it keeps full relative precision.
    let half = 0.5 * (s1 - s0);
    let rad_at = |e: f64| -l * e.powi(4) + 2.0 * c * e * e - lt;
    let (r0, r1) = (rad_at(s0).max(0.0), rad_at(s1).max(0.0));
    let integrand = |th: f64| {
        let lo_gap = 2.0 * half * (0.5 * th).sin().powi(2);
        let hi_gap = -2.0 * half * (0.5 * th).cos().powi(2);
        let (e, re, gap) = if th <= 0.5 * PI {
            (s0, r0, lo_gap)
        } else {
            (s1, r1, hi_gap)
        };
        let s = e + gap;
        let rad = re + gap * (s + e) * (2.0 * c - l * (s * s + e * e));
        if rad <= 0.0 {
            return 0.0;
        }
        s * half * th.sin() / rad.sqrt()
    };
    let q = quadrature::integrate(integrand, 0.0, PI, 1e-12, 1e-12);
    if !q.converged {
        return Err(Error::Numeric(format!(
            "implicit integral did not converge (error estimate {:.3e})",
            q.error_estimate
        )));
    }
    Ok(q.value)
}
