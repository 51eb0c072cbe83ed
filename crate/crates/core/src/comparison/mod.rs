//! The comparison equation `f'' + lambda f = lambda~ / f^3` with `f(0) = a`,
//! `f'(0) = b`, where `f = 1 / sqrt(F~)` along a unit-speed base geodesic.
//!
//! With `C = 1/2 (lambda a^2 + lambda~ / a^2 + b^2)` every solution has an
//! explicit `f^2`:
//!
//! * `lambda = 1`: `f^2 = (a^2 - C) cos 2t + a b sin 2t + C`,
//! * `lambda = 0`: `f^2 = (a + b t)^2 + lambda~ (t / a)^2`,
//! * `lambda = -1`: `f^2 = P e^{2t} + Q e^{-2t} - C` with
//!   `P, Q = 1/2 (a^2 + C ± a b)`.

mod numeric;
mod taxonomy;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::Scalar;
use crate::quadrature;

pub use numeric::{implicit_time, monotone_segment, numeric_integrate, NumericSolution, NumericSummary, F_FLOOR};
pub use taxonomy::{a_grid, b_grid, classify_completeness, ExceptionalFamily, IntervalType, Taxonomy};

/// Relative tolerance for the algebraic identities between equivalent forms.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Relative size below which exponential coefficients and `1 - ab` snap to 0.
const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonCase {
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

fn is_sign(v: f64) -> bool {
    v == -1.0 || v == 0.0 || v == 1.0
}

/// Builds a case and checks the first-integral identities.
pub fn make_case(lambda: f64, lambda_tilde: f64, a: f64, b: f64) -> Result<ComparisonCase> {
    if !is_sign(lambda) || !is_sign(lambda_tilde) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda}, lambda~ = {lambda_tilde} must lie in {{-1, 0, 1}}"
        )));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("a = {a} must be positive")));
    }
    if !b.is_finite() {
        return Err(Error::InvalidParameter(format!("b = {b} must be finite")));
    }
    let c = 0.5 * (lambda * a * a + lambda_tilde / (a * a) + b * b);
    let case = ComparisonCase {
        lambda,
        lambda_tilde,
        a,
        b,
        c,
    };
    let defect = case.first_integral_defect();
    if defect > IDENTITY_TOL {
        return Err(Error::Numeric(format!("first integral defect {defect:.3e}")));
    }
    Ok(case)
}

impl ComparisonCase {
    /// Relative defect of `-lambda a^4 + 2 C a^2 - lambda~ = (ab)^2`, and of
    /// the completed-square form when `lambda != 0`.
    pub fn first_integral_defect(&self) -> f64 {
        let (l, lt, a, b, c) = (self.lambda, self.lambda_tilde, self.a, self.b, self.c);
        let a2 = a * a;
        let ab2 = (a * b).powi(2);
        let lhs = -l * a2 * a2 + 2.0 * c * a2 - lt;
        let scale = (l * a2 * a2).abs() + (2.0 * c * a2).abs() + lt.abs() + ab2;
        let mut defect = (lhs - ab2).abs() / scale.max(f64::MIN_POSITIVE);
        if l != 0.0 {
            let sq = -l * (a2 - c / l).powi(2) + c * c / l - lt;
            let scale = (a2 - c / l).powi(2) + c * c + lt.abs() + ab2;
            defect = defect.max((sq - ab2).abs() / scale);
        }
        defect
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormKind {
    /// `lambda = 1`.
    Trigonometric,
    /// `lambda = 0`, `lambda~ = 0`: `f = a + b t`.
    Linear,
    /// `lambda = 0`, `lambda~ != 0`.
    Quadratic,
    /// `lambda = -1`, `C^2 + lambda~ > 0`.
    Cosh,
    /// `lambda = -1`, `C^2 + lambda~ = 0`.
    Exponential,
    /// `lambda = -1`, `C^2 + lambda~ < 0`.
    Sinh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum LengthClass {
    Finite { value: f64 },
    Infinite,
}

impl LengthClass {
    pub fn is_infinite(&self) -> bool {
        matches!(self, LengthClass::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
enum Branch {
    /// `f^2 = r sin(2t + theta) + c`.
    Trig { r: f64, theta: f64, c: f64 },
    /// `f^2 = q t^2 + 2 ab t + a^2`.
    Poly { q: f64, ab: f64, a2: f64 },
    /// `f^2 = p e^{2t} + q e^{-2t} - c`.
    Hyper { p: f64, q: f64, c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSolution {
    pub case: ComparisonCase,
    pub kind: ClosedFormKind,
    /// Maximal interval around 0; infinite ends are `±inf`.
    pub interval: (f64, f64),
    /// `∫_0^{t_hi} dt / f^2`.
    pub length_forward: LengthClass,
    /// `∫_{t_lo}^0 dt / f^2`.
    pub length_backward: LengthClass,
    branch: Branch,
}

/// The explicit solution with its interval and length classes.
pub fn closed_form(case: &ComparisonCase) -> ComparisonSolution {
    let ComparisonCase {
        lambda: l,
        lambda_tilde: lt,
        a,
        b,
        c,
    } = *case;
    let a2 = a * a;
    let ab = a * b;
    let (kind, branch) = if l == 1.0 {
        let r = ((a2 - c).powi(2) + ab * ab).sqrt();
        let theta = (a2 - c).atan2(ab);
        (ClosedFormKind::Trigonometric, Branch::Trig { r, theta, c })
    } else if l == 0.0 {
        let kind = if lt == 0.0 {
            ClosedFormKind::Linear
        } else {
            ClosedFormKind::Quadratic
        };
        let mut q = b * b + lt / a2;
        if q.abs() <= SNAP * (b * b + 1.0 / a2) {
            q = 0.0;
        }
        (kind, Branch::Poly { q, ab, a2 })
    } else {
        let scale = (a2 + c).abs() + ab.abs();
        let snap = |v: f64| if v.abs() <= SNAP * scale { 0.0 } else { v };
        let p = snap(0.5 * (a2 + c + ab));
        let q = snap(0.5 * (a2 + c - ab));
        let disc = c * c + lt;
        let kind = if disc.abs() <= SNAP * (c * c + 1.0) {
            ClosedFormKind::Exponential
        } else if disc > 0.0 {
            ClosedFormKind::Cosh
        } else {
            ClosedFormKind::Sinh
        };
        (kind, Branch::Hyper { p, q, c })
    };
    let mut sol = ComparisonSolution {
        case: *case,
        kind,
        interval: (f64::NEG_INFINITY, f64::INFINITY),
        length_forward: LengthClass::Infinite,
        length_backward: LengthClass::Infinite,
        branch,
    };
    sol.interval = sol.compute_interval();
    let (fw, bw) = sol.compute_lengths();
    sol.length_forward = fw;
    sol.length_backward = bw;
    sol
}

/// `(t_lo, t_hi)` of the maximal solution.
pub fn maximal_interval(sol: &ComparisonSolution) -> (f64, f64) {
    sol.interval
}

/// `(forward, backward)` length classes of `∫ dt / f^2`.
pub fn length_classification(sol: &ComparisonSolution) -> (LengthClass, LengthClass) {
    (sol.length_forward, sol.length_backward)
}

impl ComparisonSolution {
    /// `f(t)^2` from the explicit form (meaningful inside the interval).
    pub fn f_squared(&self, t: f64) -> f64 {
        self.f_squared_generic(t)
    }

    pub fn f(&self, t: f64) -> f64 {
        self.f_squared(t).max(0.0).sqrt()
    }

    /// `f^2` over any scalar ring, for jet differentiation in `t`.
    pub fn f_squared_generic<S: Scalar>(&self, t: S) -> S {
        match self.branch {
            Branch::Trig { r, theta, c } => (t * 2.0 + theta).sin() * r + c,
            Branch::Poly { q, ab, a2 } => (t.clone() * q + 2.0 * ab) * t + a2,
            Branch::Hyper { p, q, c } => {
                let e = (t * 2.0).exp();
                e.clone() * p + e.recip() * q - c
            }
        }
    }

    pub fn f_generic<S: Scalar>(&self, t: S) -> S {
        self.f_squared_generic(t).sqrt()
    }

    /// `f(t)^2` in the displayed branch form: `(a^2 - C) cos 2t + ab sin 2t + C`,
    /// `(a + bt)^2 + lambda~ (t/a)^2` or `(a^2 + C) cosh 2t + ab sinh 2t - C`.
    pub fn f_squared_displayed(&self, t: f64) -> f64 {
        let ComparisonCase {
            lambda: l,
            lambda_tilde: lt,
            a,
            b,
            c,
        } = self.case;
        let (a2, ab) = (a * a, a * b);
        if l == 1.0 {
            (a2 - c) * (2.0 * t).cos() + ab * (2.0 * t).sin() + c
        } else if l == 0.0 {
            (a + b * t).powi(2) + lt * (t / a).powi(2)
        } else {
            (a2 + c) * (2.0 * t).cosh() + ab * (2.0 * t).sinh() - c
        }
    }

    /// `f(t)^2` through the inverse-function forms: `sqrt(C^2 - lambda~)
    /// sin(asin((a^2 - C)/sqrt(C^2 - lambda~)) ± 2t) + C` for `lambda = 1`
    /// and the cosh / exponential / sinh forms for `lambda = -1`. The sign is
    /// that of `b` (`+` for `b = 0`); the cosh form additionally carries the
    /// sign of `a^2 + C`, which may be negative.
    pub fn f_squared_rewritten(&self, t: f64) -> f64 {
        let ComparisonCase {
            lambda: l,
            lambda_tilde: lt,
            a,
            b,
            c,
        } = self.case;
        let a2 = a * a;
        let pm = if b < 0.0 { -1.0 } else { 1.0 };
        if l == 1.0 {
            let r = (c * c - lt).max(0.0).sqrt();
            if r == 0.0 {
                return c;
            }
            let s = ((a2 - c) / r).clamp(-1.0, 1.0);
            return r * (s.asin() + pm * 2.0 * t).sin() + c;
        }
        if l == 0.0 {
            return self.f_squared_displayed(t);
        }
        match self.kind {
            ClosedFormKind::Cosh => {
                let r = (c * c + lt).sqrt();
                let s = if a2 + c < 0.0 { -1.0 } else { 1.0 };
                let arg = ((a2 + c).abs() / r).max(1.0);
                s * r * (arg.acosh() + s * pm * 2.0 * t).cosh() - c
            }
            ClosedFormKind::Sinh => {
                let r = (-(c * c) - lt).sqrt();
                r * (((a2 + c) / r).asinh() + pm * 2.0 * t).sinh() - c
            }
            _ => {
                let sign = if (a2 + c) * a * b < 0.0 { -1.0 } else { 1.0 };
                (sign * 2.0 * t).exp() * (a2 + c) - c
            }
        }
    }

    /// `f` is constant (`f' = 0` identically).
    pub fn is_constant(&self) -> bool {
        match self.branch {
            Branch::Trig { r, .. } => r == 0.0,
            Branch::Poly { q, ab, .. } => q == 0.0 && ab == 0.0,
            Branch::Hyper { p, q, .. } => p == 0.0 && q == 0.0,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.interval.0 && t < self.interval.1
    }

    fn compute_interval(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match self.branch {
            Branch::Trig { r, theta, c } => {
                if r == 0.0 || c > r * (1.0 + SNAP) {
                    return (-inf, inf);
                }
                // f^2 > 0 where sin(2t + theta) > -c / r, i.e. on
                // (alpha, pi - alpha) mod 2 pi.
                let alpha = (-c / r).clamp(-1.0, 1.0).asin();
                let k = ((theta - alpha) / (2.0 * PI)).floor();
                let lo = alpha + 2.0 * PI * k;
                ((lo - theta) / 2.0, (lo + PI - 2.0 * alpha - theta) / 2.0)
            }
            Branch::Poly { q, ab, a2 } => {
                let lt = self.case.lambda_tilde;
                if lt == 1.0 {
                    return (-inf, inf);
                }
                if lt == 0.0 {
                    // f = a + bt
                    let (a, b) = (self.case.a, self.case.b);
                    return if b == 0.0 {
                        (-inf, inf)
                    } else if b > 0.0 {
                        (-a / b, inf)
                    } else {
                        (-inf, -a / b)
                    };
                }
                // Roots a^2 / (1 - ab) and -a^2 / (1 + ab).
                let one_minus = if (1.0 - ab).abs() <= SNAP { 0.0 } else { 1.0 - ab };
                let one_plus = if (1.0 + ab).abs() <= SNAP { 0.0 } else { 1.0 + ab };
                let r1 = if one_minus == 0.0 { f64::NAN } else { a2 / one_minus };
                let r2 = if one_plus == 0.0 { f64::NAN } else { -a2 / one_plus };
                let _ = q;
                let roots = [r1, r2];
                let below = roots.iter().copied().filter(|r| *r < 0.0).fold(-inf, f64::max);
                let above = roots.iter().copied().filter(|r| *r > 0.0).fold(inf, f64::min);
                (below, above)
            }
            Branch::Hyper { p, q, c } => {
                let roots = self.exp_roots(p, q, c);
                // u = e^{2t}; the interval around u = 1.
                let below = roots.iter().copied().filter(|u| *u < 1.0).fold(0.0, f64::max);
                let above = roots.iter().copied().filter(|u| *u > 1.0).fold(inf, f64::min);
                let to_t = |u: f64| {
                    if u == 0.0 {
                        -inf
                    } else if u == inf {
                        inf
                    } else {
                        0.5 * u.ln()
                    }
                };
                (to_t(below), to_t(above))
            }
        }
    }

    /// Positive roots `u` of `p u^2 - c u + q = 0`, whose discriminant is
    /// `c^2 - 4pq = -lambda~` exactly.
    fn exp_roots(&self, p: f64, q: f64, c: f64) -> Vec<f64> {
        let lt = self.case.lambda_tilde;
        let mut roots = Vec::new();
        if p == 0.0 && q == 0.0 {
            return roots;
        }
        if p == 0.0 {
            if c != 0.0 {
                roots.push(q / c);
            }
        } else if q == 0.0 {
            if c != 0.0 {
                roots.push(c / p);
            }
        } else if -lt >= 0.0 {
            let s = if c >= 0.0 { (-lt).sqrt() } else { -(-lt).sqrt() };
            let m = c + s;
            if m != 0.0 {
                roots.push(m / (2.0 * p));
                roots.push(2.0 * q / m);
            }
        }
        roots.retain(|u| *u > 0.0 && u.is_finite());
        roots
    }

    /// Whether `f^2` grows at least quadratically at the infinite end in
    /// direction `dir` (`+1` forward, `-1` backward).
    fn grows(&self, dir: f64) -> bool {
        match self.branch {
            Branch::Trig { .. } => false,
            Branch::Poly { q, .. } => q > 0.0,
            Branch::Hyper { p, q, .. } => {
                if dir > 0.0 {
                    p > 0.0
                } else {
                    q > 0.0
                }
            }
        }
    }

    fn compute_lengths(&self) -> (LengthClass, LengthClass) {
        let (lo, hi) = self.interval;
        let classify = |end: f64, dir: f64| {
            if end.is_finite() || !self.grows(dir) {
                LengthClass::Infinite
            } else {
                let (from, to) = if dir > 0.0 { (0.0, end) } else { (end, 0.0) };
                LengthClass::Finite {
                    value: self.length_between(from, to),
                }
            }
        };
        (classify(hi, 1.0), classify(lo, -1.0))
    }

    /// `∫_{t0}^{t1} dt / f^2` by adaptive quadrature (1e-12 absolute target).
    pub fn length_between(&self, t0: f64, t1: f64) -> f64 {
        quadrature::integrate(|t| 1.0 / self.f_squared(t), t0, t1, 1e-12, 1e-13).value
    }

    /// `F~(c'(t)) = 1 / f(t)^2`, checked against the theorem form.
    pub fn evolution_law(&self, t: f64) -> Result<f64> {
        if !self.contains(t) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} outside the maximal interval ({}, {})",
                self.interval.0, self.interval.1
            )));
        }
        let value = 1.0 / self.f_squared(t);
        let (den, scale) = self.theorem_denominator(t);
        let theorem = 1.0 / den;
        let defect = (den - self.f_squared(t)).abs() / scale;
        if defect > IDENTITY_TOL {
            return Err(Error::Numeric(format!(
                "theorem form {theorem:e} disagrees with the explicit solution {value:e} (defect {defect:.3e})"
            )));
        }
        Ok(value)
    }

    /// Denominator of the theorem form of `F~` (equal to `f^2`) and the sum of
    /// its term magnitudes.
    fn theorem_denominator(&self, t: f64) -> (f64, f64) {
        let ComparisonCase {
            lambda: l,
            lambda_tilde: lt,
            a,
            b,
            ..
        } = self.case;
        let a2 = a * a;
        let ab = a * b;
        let terms: [f64; 3] = if l == 1.0 {
            [
                (a2 - lt / a2 - b * b) * (2.0 * t).cos(),
                2.0 * ab * (2.0 * t).sin(),
                a2 + lt / a2 + b * b,
            ]
        } else if l == 0.0 {
            [2.0 * (a + b * t).powi(2), 2.0 * lt * (t / a).powi(2), 0.0]
        } else {
            [
                (a2 + lt / a2 + b * b) * (2.0 * t).cosh(),
                2.0 * ab * (2.0 * t).sinh(),
                -(-a2 + lt / a2 + b * b),
            ]
        };
        let sum: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|v| v.abs()).sum();
        (0.5 * sum, 0.5 * scale.max(f64::MIN_POSITIVE))
    }
}

/// `F~(c'(t))` for the case, rejecting `t` outside the maximal interval.
pub fn evolution_law(case: &ComparisonCase, t: f64) -> Result<f64> {
    closed_form(case).evolution_law(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_from_examples() {
        assert_eq!(make_case(1.0, 1.0, 1.0, 0.0).unwrap().c, 1.0);
        assert_eq!(make_case(-1.0, -1.0, 1.0, 0.0).unwrap().c, -1.0);
        assert_eq!(make_case(0.0, 1.0, 2.0, 0.5).unwrap().c, 0.25);
        assert!(make_case(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(make_case(2.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn intervals_of_examples() {
        let whole = (f64::NEG_INFINITY, f64::INFINITY);
        let i = |l, lt, a, b| closed_form(&make_case(l, lt, a, b).unwrap()).interval;
        assert_eq!(i(1.0, 1.0, 1.0, 0.0), whole);
        assert_eq!(i(1.0, 1.0, 0.3, -2.0), whole);
        let (lo, hi) = i(1.0, 0.0, 1.0, 0.0);
        assert!((lo + PI / 2.0).abs() < 1e-14 && (hi - PI / 2.0).abs() < 1e-14);
        assert_eq!(i(-1.0, 0.0, 1.0, 0.5), whole);
        let (lo, hi) = i(0.0, -1.0, 1.0, 1.0);
        assert_eq!((lo, hi), (-0.5, f64::INFINITY));
        assert_eq!(i(-1.0, -1.0, 1.0, 0.0), whole);
    }

    #[test]
    fn forms_agree() {
        for l in [-1.0, 0.0, 1.0] {
            for lt in [-1.0, 0.0, 1.0] {
                for (a, b) in [(0.5, 1.5), (1.0, 0.0), (2.0, -0.7), (0.3, 0.2), (1.7, 3.0)] {
                    let s = closed_form(&make_case(l, lt, a, b).unwrap());
                    for k in -4..=4 {
                        let t = 0.1 * k as f64;
                        if !s.contains(t) {
                            continue;
                        }
                        let f2 = s.f_squared(t);
                        let scale = 1.0 + f2.abs() + s.case.c.abs() + a * a;
                        assert!(
                            (s.f_squared_displayed(t) - f2).abs() < 1e-12 * scale,
                            "{l} {lt} {a} {b} {t}"
                        );
                        assert!(
                            (s.f_squared_rewritten(t) - f2).abs() < 1e-9 * scale,
                            "rw {l} {lt} {a} {b} {t}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn evolution_law_examples() {
        let s = closed_form(&make_case(1.0, 1.0, 1.0, 0.0).unwrap());
        assert!((s.evolution_law(0.7).unwrap() - 1.0).abs() < 1e-15);
        let (a, b) = (1.3, -0.4);
        let s = closed_form(&make_case(0.0, 1.0, a, b).unwrap());
        let t = 0.9;
        let expect = 1.0 / ((a + b * t).powi(2) + (t / a).powi(2));
        assert!((s.evolution_law(t).unwrap() - expect).abs() < 1e-14);
        let a = 2.0;
        for (b, sign) in [(a - 1.0 / a, 1.0), (1.0 / a - a, -1.0)] {
            let s = closed_form(&make_case(-1.0, -1.0, a, b).unwrap());
            assert_eq!(s.case.c, -1.0);
            let t = 0.4;
            let expect = 1.0 / ((sign * 2.0 * t).exp() * (a * a - 1.0) + 1.0);
            assert!((s.evolution_law(t).unwrap() - expect).abs() < 1e-14);
        }
        let s = closed_form(&make_case(1.0, 0.0, 1.0, 0.0).unwrap());
        assert!(s.evolution_law(2.0).is_err());
    }
}
