//! The scalar algebra Lagrangians and fields are written against.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::jets::JetScalar;

/// Arithmetic shared by plain `f64` and [`JetScalar`].
///
/// Constants are produced from an existing value with
/// [`Scalar::constant_like`], so jets keep their seed layout.
pub trait Scalar:
    Clone
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
    fn value(&self) -> f64;
    fn constant_like(&self, c: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn powf(&self, r: f64) -> Self;
    fn powi(&self, n: i32) -> Self;
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
    fn powf(&self, r: f64) -> Self {
        f64::powf(*self, r)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

impl Scalar for JetScalar {
    fn value(&self) -> f64 {
        JetScalar::value(self)
    }
    fn constant_like(&self, c: f64) -> Self {
        JetScalar::constant_like(self, c)
    }
    fn sqrt(&self) -> Self {
        JetScalar::sqrt(self)
    }
    fn powf(&self, r: f64) -> Self {
        JetScalar::powf(self, r)
    }
    fn powi(&self, n: i32) -> Self {
        JetScalar::powi(self, n)
    }
}

/// `Σ a_i b_i`; panics on empty input.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = a[0].clone() * b[0].clone();
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}
