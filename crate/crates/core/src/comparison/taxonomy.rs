//! Completeness taxonomy over the `(lambda, lambda~, a, b)` parameter space.

use serde::Serialize;

use super::{closed_form, make_case, ClosedFormKind, LengthClass};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalType {
    /// `(-inf, inf)`.
    Whole,
    /// `(-d, inf)`.
    RightRay,
    /// `(-inf, d)`.
    LeftRay,
    /// `(-d1, d2)`.
    Bounded,
}

/// Named closed-form families singled out by the classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionalFamily {
    /// `lambda = lambda~ = 0`, `b = 0`: `F~ = F / a^2`.
    ConstantRatio,
    /// `lambda = 0`, `lambda~ = -1`, `ab = 1`: `F~ = 1 / (a^2 + 2t)`.
    LinearForward,
    /// `lambda = 0`, `lambda~ = -1`, `ab = -1`: `F~ = 1 / (a^2 - 2t)`.
    LinearBackward,
    /// `lambda = -1`, `lambda~ = 0`, `b = -a`: `F~ = (e^t / a)^2`.
    PlusFF,
    /// `lambda = -1`, `lambda~ = 0`, `b = a`: `F~ = (e^{-t} / a)^2`.
    MinusFF,
    /// `lambda = lambda~ = -1`, `b = 1/a - a`: `F~ = 1 / (e^{-2t}(a^2 - 1) + 1)`.
    PlusF,
    /// `lambda = lambda~ = -1`, `b = a - 1/a`: `F~ = 1 / (e^{2t}(a^2 - 1) + 1)`.
    MinusF,
    /// `lambda = lambda~ = -1`, `a = 1`, `b = 0`: `F~ = F`.
    Rigid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Taxonomy {
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub kind: ClosedFormKind,
    pub interval_type: IntervalType,
    /// Finite endpoints; `None` marks an infinite end.
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    pub length_forward: LengthClass,
    pub length_backward: LengthClass,
    /// `F~` has infinite length forward / backward along the geodesic.
    pub forward_complete: bool,
    pub backward_complete: bool,
    /// The base geodesic extends to `+inf` and the forward `F~` length is
    /// infinite, so both metrics are forward complete along it.
    pub forward_pair_complete: bool,
    pub backward_pair_complete: bool,
    /// Both of the above.
    pub bi_complete: bool,
    pub families: Vec<ExceptionalFamily>,
}

fn close(u: f64, v: f64) -> bool {
    (u - v).abs() <= 1e-12 * (1.0 + u.abs() + v.abs())
}

fn families(l: f64, lt: f64, a: f64, b: f64) -> Vec<ExceptionalFamily> {
    use ExceptionalFamily::*;
    let mut out = Vec::new();
    match (l as i8, lt as i8) {
        (0, 0) if b == 0.0 => out.push(ConstantRatio),
        (0, -1) => {
            if close(a * b, 1.0) {
                out.push(LinearForward);
            }
            if close(a * b, -1.0) {
                out.push(LinearBackward);
            }
        }
        (-1, 0) => {
            if close(b, -a) {
                out.push(PlusFF);
            }
            if close(b, a) {
                out.push(MinusFF);
            }
        }
        (-1, -1) => {
            if close(b, 1.0 / a - a) {
                out.push(PlusF);
            }
            if close(b, a - 1.0 / a) {
                out.push(MinusF);
            }
            if close(a, 1.0) && b == 0.0 {
                out.push(Rigid);
            }
        }
        _ => {}
    }
    out
}

pub fn classify_completeness(lambda: f64, lambda_tilde: f64, a: f64, b: f64) -> Result<Taxonomy> {
    let case = make_case(lambda, lambda_tilde, a, b)?;
    let sol = closed_form(&case);
    let (lo, hi) = sol.interval;
    let interval_type = match (lo.is_finite(), hi.is_finite()) {
        (false, false) => IntervalType::Whole,
        (true, false) => IntervalType::RightRay,
        (false, true) => IntervalType::LeftRay,
        (true, true) => IntervalType::Bounded,
    };
    let forward_complete = sol.length_forward.is_infinite();
    let backward_complete = sol.length_backward.is_infinite();
    let forward_pair_complete = hi == f64::INFINITY && forward_complete;
    let backward_pair_complete = lo == f64::NEG_INFINITY && backward_complete;
    Ok(Taxonomy {
        lambda,
        lambda_tilde,
        a,
        b,
        c: case.c,
        kind: sol.kind,
        interval_type,
        t_lo: lo.is_finite().then_some(lo),
        t_hi: hi.is_finite().then_some(hi),
        length_forward: sol.length_forward,
        length_backward: sol.length_backward,
        forward_complete,
        backward_complete,
        forward_pair_complete,
        backward_pair_complete,
        bi_complete: forward_pair_complete && backward_pair_complete,
        families: families(lambda, lambda_tilde, a, b),
    })
}

/// Initial values `a`: `0.1`, then `0.5, 1.0, ..., 9.0`, then `10`.
pub fn a_grid() -> Vec<f64> {
    let mut out = vec![0.1];
    out.extend((1..=18).map(|i| 0.5 * i as f64));
    out.push(10.0);
    out
}

/// Initial slopes `b = -10, -9.5, ..., 10`.
pub fn b_grid() -> Vec<f64> {
    (0..=40).map(|j| -10.0 + 0.5 * j as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        assert_eq!(a_grid().len(), 20);
        assert_eq!(b_grid().len(), 41);
        assert!(a_grid().contains(&1.0) && b_grid().contains(&0.0));
    }

    #[test]
    fn rigid_cell() {
        let t = classify_completeness(-1.0, -1.0, 1.0, 0.0).unwrap();
        assert!(t.bi_complete);
        assert!(t.families.contains(&ExceptionalFamily::Rigid));
        let t = classify_completeness(-1.0, -1.0, 2.0, -1.5).unwrap();
        assert!(!t.bi_complete && t.forward_complete && !t.backward_complete);
        assert_eq!(t.families, vec![ExceptionalFamily::PlusF]);
    }
}
