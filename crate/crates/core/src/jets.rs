//! Truncated multivariate Taylor arithmetic.
//!
//! A [`JetScalar`] stores the Taylor coefficients of a smooth function of
//! `nvars` seed variables around a point, up to a total degree `order`.
//! Coefficients are kept in graded order (all degree-0 monomials, then
//! degree 1, ...), so a jet of lower order is a prefix of a jet of higher
//! order and truncation is a slice operation.
//!
//! Storage convention: `coeffs[α]` is the Taylor coefficient
//! `∂^α f / α!`. [`JetScalar::partial`] multiplies by `α!` to return the
//! partial derivative itself.
//!
//! Operators (`+`, `*`, ...) between jets of different orders truncate the
//! result to the smaller order, which is exact in the quotient ring of
//! truncated series. The checked entry point [`JetScalar::combine`] instead
//! rejects mismatched operands.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Largest supported total derivative order.
pub const MAX_ORDER: usize = 5;
/// Largest supported number of seed variables.
pub const MAX_VARS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet order {0} outside 1..={MAX_ORDER}")]
    OrderOutOfRange(usize),
    #[error("{0} seed variables exceed the supported maximum of {MAX_VARS}")]
    TooManyVariables(usize),
    #[error("seed value {0} is not finite")]
    NonFinite(f64),
    #[error(
        "operands disagree: {lhs_vars} vars/order {lhs_order} vs {rhs_vars} vars/order {rhs_order}"
    )]
    Mismatch {
        lhs_vars: usize,
        lhs_order: usize,
        rhs_vars: usize,
        rhs_order: usize,
    },
    #[error("division by a jet with zero value")]
    DivisionByZero,
    #[error("square root of a jet with nonpositive value {0}")]
    SqrtDomain(f64),
    #[error("multi-index {index:?} invalid for a jet of {nvars} vars and order {order}")]
    BadIndex {
        index: Vec<usize>,
        nvars: usize,
        order: usize,
    },
}

/// Binary and unary operations accepted by [`JetScalar::combine`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Real power `a^r`; the exponent is carried by the variant.
    Pow(f64),
    Sqrt,
    Neg,
}

const NONE: u32 = u32::MAX;

/// Enumerates exponent vectors of total degree `<= max_degree` in graded
/// order; within one degree, lexicographically descending (`x0^2`, `x0 x1`,
/// `x1^2`, ...).
pub fn monomials(nvars: usize, max_degree: usize) -> Vec<Vec<u8>> {
    fn fill(rest: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if rest == 1 {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            fill(rest - 1, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        out.push(Vec::new());
        return out;
    }
    for d in 0..=max_degree {
        fill(nvars, d, &mut Vec::with_capacity(nvars), &mut out);
    }
    out
}

struct Layout {
    nvars: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `count_upto[k]`: number of monomials of degree <= k.
    count_upto: [usize; MAX_ORDER + 1],
    /// `successor[i * nvars + v]`: index of monomial `i + e_v`, or NONE.
    successor: Vec<u32>,
    /// `(lhs, rhs, out)` index triples, sorted by `out`.
    products: Vec<(u32, u32, u32)>,
    products_upto: [usize; MAX_ORDER + 1],
    factorial: Vec<f64>,
}

impl Layout {
    fn build(nvars: usize) -> Layout {
        let monomials = monomials(nvars, MAX_ORDER);
        let degree: Vec<usize> = monomials
            .iter()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut count_upto = [0usize; MAX_ORDER + 1];
        for (k, slot) in count_upto.iter_mut().enumerate() {
            *slot = degree.iter().filter(|&&d| d <= k).count();
        }

        let mut successor = vec![NONE; monomials.len() * nvars];
        for (i, m) in monomials.iter().enumerate() {
            if degree[i] == MAX_ORDER {
                continue;
            }
            for v in 0..nvars {
                let mut next = m.clone();
                next[v] += 1;
                successor[i * nvars + v] = index[&next] as u32;
            }
        }

        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degree[i] + degree[j] > MAX_ORDER {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        products.sort_by_key(|&(i, j, k)| (k, i, j));
        let mut products_upto = [0usize; MAX_ORDER + 1];
        for (k, slot) in products_upto.iter_mut().enumerate() {
            *slot = products
                .iter()
                .take_while(|&&(_, _, out)| (out as usize) < count_upto[k])
                .count();
        }

        let factorial = monomials
            .iter()
            .map(|m| {
                m.iter()
                    .map(|&e| (1..=e as u64).product::<u64>() as f64)
                    .product()
            })
            .collect();

        Layout {
            nvars,
            monomials,
            index,
            count_upto,
            successor,
            products,
            products_upto,
            factorial,
        }
    }
}

fn layout(nvars: usize) -> &'static Layout {
    static LAYOUTS: [OnceLock<Layout>; MAX_VARS + 1] = [const { OnceLock::new() }; MAX_VARS + 1];
    assert!(
        nvars <= MAX_VARS,
        "jets support at most {MAX_VARS} variables"
    );
    LAYOUTS[nvars].get_or_init(|| Layout::build(nvars))
}

/// Number of stored coefficients for a jet with the given shape.
pub fn coefficient_count(nvars: usize, order: usize) -> usize {
    layout(nvars).count_upto[order]
}

/// A truncated multivariate Taylor expansion.
#[derive(Clone, PartialEq)]
pub struct JetScalar {
    nvars: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for JetScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetScalar")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

/// Seeds one independent variable per entry of `values`.
///
/// Each returned jet has value `values[i]`, unit first derivative in slot
/// `i` and zero elsewhere.
pub fn jet_seed(values: &[f64], order: usize) -> Result<Vec<JetScalar>, JetError> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(JetError::OrderOutOfRange(order));
    }
    if values.len() > MAX_VARS {
        return Err(JetError::TooManyVariables(values.len()));
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(JetError::NonFinite(bad));
    }
    let n = values.len();
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &v)| JetScalar::variable(n, order, i, v))
        .collect())
}

impl JetScalar {
    /// A constant jet (all derivatives zero).
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut coeffs = vec![0.0; layout(nvars).count_upto[order]];
        coeffs[0] = value;
        JetScalar {
            nvars,
            order,
            coeffs,
        }
    }

    /// Seed variable `index` among `nvars` at `value`.
    pub fn variable(nvars: usize, order: usize, index: usize, value: f64) -> Self {
        assert!(index < nvars);
        let mut jet = Self::constant(nvars, order, value);
        if order >= 1 {
            // Degree-1 monomials follow the constant term in seed order.
            jet.coeffs[1 + index] = 1.0;
        }
        jet
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in graded order (see [`monomials`]).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The same jet with a fresh constant term.
    pub fn with_value(mut self, value: f64) -> Self {
        self.coeffs[0] = value;
        self
    }

    /// A constant with the same shape as `self`.
    pub fn constant_like(&self, value: f64) -> Self {
        Self::constant(self.nvars, self.order, value)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn check_index(&self, index: &[usize]) -> Result<Vec<u8>, JetError> {
        let bad = || JetError::BadIndex {
            index: index.to_vec(),
            nvars: self.nvars,
            order: self.order,
        };
        if index.len() != self.nvars || index.iter().sum::<usize>() > self.order {
            return Err(bad());
        }
        Ok(index.iter().map(|&e| e as u8).collect())
    }

    /// Taylor coefficient `∂^α f / α!` for the exponent vector `index`.
    pub fn taylor_coefficient(&self, index: &[usize]) -> Result<f64, JetError> {
        let key = self.check_index(index)?;
        Ok(self.coeffs[layout(self.nvars).index[&key]])
    }

    /// Partial derivative `∂^α f` for the exponent vector `index`.
    pub fn partial(&self, index: &[usize]) -> Result<f64, JetError> {
        let key = self.check_index(index)?;
        let lay = layout(self.nvars);
        let i = lay.index[&key];
        Ok(self.coeffs[i] * lay.factorial[i])
    }

    /// First partial derivative with respect to seed `var`.
    pub fn first(&self, var: usize) -> f64 {
        assert!(var < self.nvars && self.order >= 1);
        self.coeffs[1 + var]
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        JetScalar {
            nvars: self.nvars,
            order,
            coeffs: self.coeffs[..layout(self.nvars).count_upto[order]].to_vec(),
        }
    }

    /// Exact derivative with respect to seed `var`; the result has order
    /// `order - 1`.
    ///
    /// Panics on an order-0 jet.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        assert!(var < self.nvars);
        let lay = layout(self.nvars);
        let order = self.order - 1;
        let coeffs = (0..lay.count_upto[order])
            .map(|i| {
                let next = lay.successor[i * lay.nvars + var] as usize;
                (lay.monomials[i][var] as f64 + 1.0) * self.coeffs[next]
            })
            .collect();
        JetScalar {
            nvars: self.nvars,
            order,
            coeffs,
        }
    }

    fn assert_compatible(&self, other: &Self) {
        assert_eq!(
            self.nvars, other.nvars,
            "jets over different seed variables cannot be combined"
        );
    }

    fn add_impl(&self, other: &Self, sign: f64) -> Self {
        self.assert_compatible(other);
        let order = self.order.min(other.order);
        let n = layout(self.nvars).count_upto[order];
        let coeffs = (0..n)
            .map(|i| self.coeffs[i] + sign * other.coeffs[i])
            .collect();
        JetScalar {
            nvars: self.nvars,
            order,
            coeffs,
        }
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let order = self.order.min(other.order);
        let lay = layout(self.nvars);
        let mut coeffs = vec![0.0; lay.count_upto[order]];
        for &(i, j, k) in &lay.products[..lay.products_upto[order]] {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        JetScalar {
            nvars: self.nvars,
            order,
            coeffs,
        }
    }

    fn map_coeffs(&self, f: impl Fn(f64) -> f64) -> Self {
        JetScalar {
            nvars: self.nvars,
            order: self.order,
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    /// Applies a univariate function given its scaled derivatives at the
    /// value: `series[k] = f^(k)(a0) / k!`.
    fn univariate(&self, series: &[f64]) -> Self {
        let nilpotent = self.clone().with_value(0.0);
        let mut acc = self.constant_like(series[self.order]);
        for k in (0..self.order).rev() {
            acc = &acc * &nilpotent;
            acc.coeffs[0] += series[k];
        }
        acc
    }

    /// `1 / self`. Produces non-finite coefficients on a zero value; use
    /// [`JetScalar::combine`] for a checked division.
    pub fn recip(&self) -> Self {
        let a0 = self.value();
        let inv = 1.0 / a0;
        let mut series = Vec::with_capacity(self.order + 1);
        let mut term = inv;
        for _ in 0..=self.order {
            series.push(term);
            term *= -inv;
        }
        self.univariate(&series)
    }

    /// `self^r` for real `r`, expanded by the binomial series around the value.
    pub fn powf(&self, r: f64) -> Self {
        let a0 = self.value();
        let mut series = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            series.push(binom * a0.powf(r - k as f64));
            binom *= (r - k as f64) / (k as f64 + 1.0);
        }
        self.univariate(&series)
    }

    pub fn sqrt(&self) -> Self {
        let a0 = self.value();
        let root = a0.sqrt();
        let mut series = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        let mut scale = root;
        for k in 0..=self.order {
            series.push(binom * scale);
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
            scale /= a0;
        }
        self.univariate(&series)
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = self.constant_like(1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        result
    }

    /// Checked arithmetic: operands must share seed count and order. `b` is
    /// ignored by the unary operations.
    pub fn combine(op: JetOp, a: &JetScalar, b: &JetScalar) -> Result<JetScalar, JetError> {
        let binary = matches!(op, JetOp::Add | JetOp::Sub | JetOp::Mul | JetOp::Div);
        if binary && (a.nvars != b.nvars || a.order != b.order) {
            return Err(JetError::Mismatch {
                lhs_vars: a.nvars,
                lhs_order: a.order,
                rhs_vars: b.nvars,
                rhs_order: b.order,
            });
        }
        match op {
            JetOp::Add => Ok(a + b),
            JetOp::Sub => Ok(a - b),
            JetOp::Mul => Ok(a * b),
            JetOp::Div => {
                if b.value() == 0.0 {
                    Err(JetError::DivisionByZero)
                } else {
                    Ok(a * &b.recip())
                }
            }
            JetOp::Pow(r) => {
                if a.value() == 0.0 && r < 0.0 {
                    Err(JetError::DivisionByZero)
                } else {
                    Ok(a.powf(r))
                }
            }
            JetOp::Sqrt => {
                if a.value() > 0.0 {
                    Ok(a.sqrt())
                } else {
                    Err(JetError::SqrtDomain(a.value()))
                }
            }
            JetOp::Neg => Ok(-a),
        }
    }

    /// Substitutes `inner` into the expansion `self`.
    ///
    /// `self` is read as a polynomial in the displacements of its seeds;
    /// `inner[i]` supplies seed `i` as a jet over new variables, whose value
    /// must be the expansion point of seed `i`. The result lives over the
    /// variables of `inner` with order `min(self.order, inner orders)`.
    pub fn compose(&self, inner: &[JetScalar]) -> Result<JetScalar, JetError> {
        if inner.len() != self.nvars || inner.is_empty() {
            return Err(JetError::BadIndex {
                index: vec![inner.len()],
                nvars: self.nvars,
                order: self.order,
            });
        }
        let nv = inner[0].nvars;
        if let Some(bad) = inner.iter().find(|j| j.nvars != nv) {
            return Err(JetError::Mismatch {
                lhs_vars: nv,
                lhs_order: inner[0].order,
                rhs_vars: bad.nvars,
                rhs_order: bad.order,
            });
        }
        let order = inner
            .iter()
            .map(|j| j.order)
            .min()
            .unwrap_or(0)
            .min(self.order);
        // powers[i][e] = (inner_i - value_i)^e
        let powers: Vec<Vec<JetScalar>> = inner
            .iter()
            .map(|j| {
                let delta = j.truncate(order).with_value(0.0);
                let mut list = vec![delta.constant_like(1.0)];
                for e in 1..=order {
                    let next = &list[e - 1] * &delta;
                    list.push(next);
                }
                list
            })
            .collect();
        let lay = layout(self.nvars);
        let mut acc = JetScalar::constant(nv, order, 0.0);
        for (idx, mono) in lay.monomials[..lay.count_upto[order]].iter().enumerate() {
            let c = self.coeffs[idx];
            if c == 0.0 {
                continue;
            }
            let mut term = powers[0][0].clone() * c;
            for (var, &e) in mono.iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[var][e as usize];
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&JetScalar> for &JetScalar {
            type Output = JetScalar;
            fn $method(self, rhs: &JetScalar) -> JetScalar {
                let f: fn(&JetScalar, &JetScalar) -> JetScalar = $body;
                f(self, rhs)
            }
        }
        impl $trait<JetScalar> for JetScalar {
            type Output = JetScalar;
            fn $method(self, rhs: JetScalar) -> JetScalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&JetScalar> for JetScalar {
            type Output = JetScalar;
            fn $method(self, rhs: &JetScalar) -> JetScalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<JetScalar> for &JetScalar {
            type Output = JetScalar;
            fn $method(self, rhs: JetScalar) -> JetScalar {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.add_impl(b, 1.0));
jet_binop!(Sub, sub, |a, b| a.add_impl(b, -1.0));
jet_binop!(Mul, mul, |a, b| a.mul_impl(b));
jet_binop!(Div, div, |a, b| a.mul_impl(&b.recip()));

macro_rules! jet_scalar_op {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<f64> for &JetScalar {
            type Output = JetScalar;
            fn $method(self, rhs: f64) -> JetScalar {
                let f: fn(&JetScalar, f64) -> JetScalar = $body;
                f(self, rhs)
            }
        }
        impl $trait<f64> for JetScalar {
            type Output = JetScalar;
            fn $method(self, rhs: f64) -> JetScalar {
                (&self).$method(rhs)
            }
        }
    };
}

jet_scalar_op!(Add, add, |a, c| {
    let mut out = a.clone();
    out.coeffs[0] += c;
    out
});
jet_scalar_op!(Sub, sub, |a, c| {
    let mut out = a.clone();
    out.coeffs[0] -= c;
    out
});
jet_scalar_op!(Mul, mul, |a, c| a.map_coeffs(|x| x * c));
jet_scalar_op!(Div, div, |a, c| a.map_coeffs(|x| x / c));

impl Add<JetScalar> for f64 {
    type Output = JetScalar;
    fn add(self, rhs: JetScalar) -> JetScalar {
        rhs + self
    }
}

impl Sub<JetScalar> for f64 {
    type Output = JetScalar;
    fn sub(self, rhs: JetScalar) -> JetScalar {
        -rhs + self
    }
}

impl Mul<JetScalar> for f64 {
    type Output = JetScalar;
    fn mul(self, rhs: JetScalar) -> JetScalar {
        rhs * self
    }
}

impl Div<JetScalar> for f64 {
    type Output = JetScalar;
    fn div(self, rhs: JetScalar) -> JetScalar {
        rhs.powi(-1) * self
    }
}

impl Neg for &JetScalar {
    type Output = JetScalar;
    fn neg(self) -> JetScalar {
        self.map_coeffs(|x| -x)
    }
}

impl Neg for JetScalar {
    type Output = JetScalar;
    fn neg(self) -> JetScalar {
        -&self
    }
}
