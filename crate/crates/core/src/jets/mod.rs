//! Forward-mode truncated Taylor arithmetic.
//!
//! A [`Jet`] carries the Taylor coefficients of a scalar function of `n_vars`
//! variables up to a fixed total order (at most [`MAX_ORDER`]). Arithmetic and
//! the elementary functions are exact to the truncation order, so partial
//! derivatives extracted from a jet are exact up to rounding.
//!
//! Metric code is written once against the [`Scalar`] trait and evaluated
//! either on plain `f64` or on jets.

mod fd;
mod layout;
mod scalar;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

pub use fd::{fd_oracle, fd_oracle_with, FdSettings};
pub use layout::{monomial_count, JetLayout};
pub use scalar::{dot, norm_sq, Scalar};

/// Highest total derivative order a jet may carry.
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("jet order must be in 1..={MAX_ORDER}, got {0}")]
    BadOrder(usize),
    #[error("multi-index has {got} entries, jet has {expected} variables")]
    IndexLength { expected: usize, got: usize },
    #[error("multi-index degree {degree} exceeds jet order {order}")]
    DegreeTooHigh { degree: usize, order: usize },
    #[error("finite-difference extrapolation diverged (estimates {estimates:?})")]
    Diverged { estimates: Vec<f64> },
    #[error("non-finite function value in finite-difference stencil")]
    NonFinite,
}

/// Truncated multivariate Taylor polynomial.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("n_vars", &self.n_vars())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

/// Seeds `2n` jet variables: `x_0..x_{n-1}` then `y_0..y_{n-1}`.
pub fn seed_variables(x: &[f64], y: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
    if order == 0 || order > MAX_ORDER {
        return Err(JetError::BadOrder(order));
    }
    let n_vars = x.len() + y.len();
    let layout = JetLayout::get(n_vars, order);
    Ok(x.iter()
        .chain(y.iter())
        .enumerate()
        .map(|(i, &v)| Jet::variable(&layout, i, v))
        .collect())
}

/// Partial derivative of `j` for the multi-index `idx`.
pub fn extract_derivative(j: &Jet, idx: &[u8]) -> Result<f64, JetError> {
    j.derivative(idx)
}

impl Jet {
    pub fn constant(layout: &Arc<JetLayout>, value: f64) -> Self {
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Self {
            layout: layout.clone(),
            coeffs,
        }
    }

    pub fn variable(layout: &Arc<JetLayout>, var: usize, value: f64) -> Self {
        assert!(var < layout.n_vars(), "variable index out of range");
        let mut j = Self::constant(layout, value);
        if layout.order() > 0 {
            j.coeffs[layout.unit_index(var)] = 1.0;
        }
        j
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn n_vars(&self) -> usize {
        self.layout.n_vars()
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient (not derivative) of a multi-index.
    pub fn coeff(&self, idx: &[u8]) -> Result<f64, JetError> {
        self.check_index(idx)?;
        Ok(self.coeffs[self.layout.index_of(idx).expect("checked")])
    }

    /// Partial derivative: Taylor coefficient times the multi-index factorial.
    pub fn derivative(&self, idx: &[u8]) -> Result<f64, JetError> {
        self.check_index(idx)?;
        let i = self.layout.index_of(idx).expect("checked");
        Ok(self.coeffs[i] * self.layout.factorial(i))
    }

    /// First partial derivative in `var`.
    pub fn d1(&self, var: usize) -> f64 {
        if self.order() == 0 {
            return 0.0;
        }
        self.coeffs[self.layout.unit_index(var)]
    }

    /// Second partial derivative in `(u, v)`.
    pub fn d2(&self, u: usize, v: usize) -> f64 {
        let mut idx = vec![0u8; self.n_vars()];
        idx[u] += 1;
        idx[v] += 1;
        self.derivative(&idx).unwrap_or(0.0)
    }

    fn check_index(&self, idx: &[u8]) -> Result<(), JetError> {
        if idx.len() != self.n_vars() {
            return Err(JetError::IndexLength {
                expected: self.n_vars(),
                got: idx.len(),
            });
        }
        let degree: usize = idx.iter().map(|&e| e as usize).sum();
        if degree > self.order() {
            return Err(JetError::DegreeTooHigh {
                degree,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Constant jet in the same ring as `self`.
    pub fn constant_like(&self, value: f64) -> Self {
        Self::constant(&self.layout, value)
    }

    /// Drops all coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let layout = JetLayout::get(self.n_vars(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Self { layout, coeffs }
    }

    /// Exact partial derivative in `var` as a jet of one lower order.
    pub fn differentiate(&self, var: usize) -> Self {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let layout = JetLayout::get(self.n_vars(), self.order() - 1);
        let mut coeffs = vec![0.0; layout.len()];
        let mut shifted = vec![0u8; self.n_vars()];
        for (dst, mono) in layout.monomials().iter().enumerate() {
            shifted.copy_from_slice(mono);
            shifted[var] += 1;
            let src = self.layout.index_of(&shifted).expect("shifted monomial in layout");
            coeffs[dst] = self.coeffs[src] * shifted[var] as f64;
        }
        Self { layout, coeffs }
    }

    /// `f(self)` for a univariate `f` given its derivatives `f^(k)(value)`, k = 0..=order.
    pub fn compose(&self, derivs: &[f64]) -> Self {
        let order = self.order();
        debug_assert!(derivs.len() > order);
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut factorial = (1..=order).map(|k| k as f64).product::<f64>();
        let mut out = self.constant_like(derivs[order] / factorial);
        for k in (0..order).rev() {
            factorial /= (k + 1) as f64;
            out = &out * &delta;
            out.coeffs[0] += derivs[k] / factorial;
        }
        out
    }

    fn aligned<'a>(a: &'a Jet, b: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        assert_eq!(a.n_vars(), b.n_vars(), "jets over different variable sets");
        match a.order().cmp(&b.order()) {
            std::cmp::Ordering::Equal => (Cow::Borrowed(a), Cow::Borrowed(b)),
            std::cmp::Ordering::Less => (Cow::Borrowed(a), Cow::Owned(b.truncate(a.order()))),
            std::cmp::Ordering::Greater => (Cow::Owned(a.truncate(b.order())), Cow::Borrowed(b)),
        }
    }

    pub fn recip(&self) -> Self {
        let u = self.value();
        let mut derivs = [0.0; MAX_ORDER + 1];
        let mut d = 1.0 / u;
        for (k, slot) in derivs.iter_mut().enumerate().take(self.order() + 1) {
            *slot = d;
            d *= -((k + 1) as f64) / u;
        }
        self.compose(&derivs)
    }

    pub fn powf(&self, p: f64) -> Self {
        let u = self.value();
        let mut derivs = [0.0; MAX_ORDER + 1];
        let mut falling = 1.0;
        for (k, slot) in derivs.iter_mut().enumerate().take(self.order() + 1) {
            *slot = falling * u.powf(p - k as f64);
            falling *= p - k as f64;
        }
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&[e; MAX_ORDER + 1])
    }

    pub fn ln(&self) -> Self {
        let u = self.value();
        let mut derivs = [0.0; MAX_ORDER + 1];
        derivs[0] = u.ln();
        let mut d = 1.0 / u;
        for (k, slot) in derivs.iter_mut().enumerate().skip(1).take(self.order()) {
            *slot = d;
            d *= -(k as f64) / u;
        }
        self.compose(&derivs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c, s, c])
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&[s, c, s, c, s])
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&[c, s, c, s, c])
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &'a Jet) -> Jet {
        let (a, b) = Jet::aligned(self, rhs);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        Jet {
            layout: a.layout.clone(),
            coeffs,
        }
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &'a Jet) -> Jet {
        let (a, b) = Jet::aligned(self, rhs);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
        Jet {
            layout: a.layout.clone(),
            coeffs,
        }
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &'a Jet) -> Jet {
        let (a, b) = Jet::aligned(self, rhs);
        let layout = a.layout.clone();
        let mut coeffs = vec![0.0; layout.len()];
        for &(i, j, k) in layout.products() {
            coeffs[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Jet { layout, coeffs }
    }
}

impl<'a> Div<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn div(self, rhs: &'a Jet) -> Jet {
        self * &rhs.recip()
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Jet {
    fn map_coeffs(mut self, f: impl Fn(f64) -> f64) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c = f(*c));
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.map_coeffs(|c| c * rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.map_coeffs(|c| c / rhs)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip() * self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn seed_one_dimension() {
        let v = seed_variables(&[2.0], &[3.0], 1).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].value(), 2.0);
        assert_eq!(v[1].value(), 3.0);
        assert_eq!((v[0].d1(0), v[0].d1(1)), (1.0, 0.0));
        assert_eq!((v[1].d1(0), v[1].d1(1)), (0.0, 1.0));
    }

    #[test]
    fn seed_rejects_bad_orders() {
        assert_eq!(seed_variables(&[0.0], &[1.0], 0).unwrap_err(), JetError::BadOrder(0));
        assert_eq!(seed_variables(&[0.0], &[1.0], 5).unwrap_err(), JetError::BadOrder(5));
    }

    #[test]
    fn mixed_partial_of_product() {
        let v = seed_variables(&[1.5], &[-0.7], 2).unwrap();
        let p = &v[0] * &v[1];
        assert_eq!(extract_derivative(&p, &[1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn second_derivative_of_euclidean_square() {
        let v = seed_variables(&[0.1, 0.2], &[0.3, 0.4], 2).unwrap();
        let f2 = &v[2] * &v[2] + &v[3] * &v[3];
        assert_eq!(extract_derivative(&f2, &[0, 0, 2, 0]).unwrap(), 2.0);
        assert_eq!(extract_derivative(&f2, &[0, 0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn sin_at_zero() {
        let v = seed_variables(&[0.0], &[0.0], 4).unwrap();
        let s = v[0].sin();
        assert_eq!(extract_derivative(&s, &[1, 0]).unwrap(), 1.0);
        assert_eq!(extract_derivative(&s, &[3, 0]).unwrap(), -1.0);
    }

    #[test]
    fn constant_has_no_derivatives() {
        let layout = JetLayout::get(3, 4);
        let c = Jet::constant(&layout, 5.0);
        for mono in layout.monomials().iter().skip(1) {
            assert_eq!(extract_derivative(&c, mono).unwrap(), 0.0);
        }
    }

    #[test]
    fn extract_rejects_high_degree() {
        let v = seed_variables(&[0.0], &[1.0], 2).unwrap();
        assert!(matches!(
            extract_derivative(&v[0], &[2, 1]),
            Err(JetError::DegreeTooHigh { degree: 3, order: 2 })
        ));
        assert!(matches!(
            extract_derivative(&v[0], &[1]),
            Err(JetError::IndexLength { .. })
        ));
    }

    #[test]
    fn elementary_functions_match_known_derivatives() {
        let u0 = 0.7;
        let v = seed_variables(&[u0], &[1.0], 4).unwrap();
        let u = &v[0];
        let d = |j: &Jet, k: u8| extract_derivative(j, &[k, 0]).unwrap();
        for k in 0..=4u8 {
            assert!(close(d(&u.exp(), k), u0.exp(), 1e-14));
        }
        assert!(close(d(&u.ln(), 3), 2.0 / u0.powi(3), 1e-13));
        assert!(close(d(&u.ln(), 4), -6.0 / u0.powi(4), 1e-13));
        assert!(close(d(&u.sqrt(), 2), -0.25 * u0.powf(-1.5), 1e-13));
        assert!(close(d(&u.recip(), 4), 24.0 / u0.powi(5), 1e-13));
        assert!(close(d(&u.cosh(), 3), u0.sinh(), 1e-13));
        assert!(close(d(&u.sinh(), 4), u0.sinh(), 1e-13));
        assert!(close(d(&u.cos(), 2), -u0.cos(), 1e-13));
        assert!(close(d(&u.powf(3.0), 3), 6.0, 1e-13));
        assert!(close(d(&u.powf(3.0), 4), 0.0, 1e-13));
    }

    #[test]
    fn differentiate_then_extract_matches_direct() {
        let v = seed_variables(&[0.3, -0.2], &[0.9, 0.4], 4).unwrap();
        let f = (&v[0] * &v[2]).exp() / (&v[1] * &v[3] + 2.0);
        let df = f.differentiate(2);
        assert_eq!(df.order(), 3);
        let direct = extract_derivative(&f, &[1, 0, 2, 1]).unwrap();
        let via = extract_derivative(&df, &[1, 0, 1, 1]).unwrap();
        assert!(close(direct, via, 1e-13));
    }

    #[test]
    fn mixed_orders_truncate_to_lower() {
        let hi = seed_variables(&[0.5], &[1.0], 4).unwrap();
        let lo = hi[0].truncate(2);
        let s = &lo * &hi[1];
        assert_eq!(s.order(), 2);
        assert_eq!(extract_derivative(&s, &[1, 1]).unwrap(), 1.0);
    }
}
