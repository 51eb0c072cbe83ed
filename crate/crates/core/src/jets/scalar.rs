use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Jet;

/// Commutative ring with the elementary functions, shared by `f64` and [`Jet`].
///
/// Metric formulas are written once against this trait; evaluating them on
/// seeded jets yields exact derivatives.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Degree-0 part.
    fn value(&self) -> f64;
    /// A constant living in the same ring as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn recip(&self) -> Self;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant_like(self, c)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn powf(&self, p: f64) -> Self {
        Jet::powf(self, p)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn sinh(&self) -> Self {
        Jet::sinh(self)
    }
    fn cosh(&self) -> Self {
        Jet::cosh(self)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn square(&self) -> Self {
        self * self
    }
}

/// Euclidean inner product. Panics on empty input.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = a[0].clone() * b[0].clone();
    for (u, v) in a.iter().zip(b).skip(1) {
        acc = acc + u.clone() * v.clone();
    }
    acc
}

pub fn norm_sq<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}
