//! Multivariate polynomials with real coefficients.
//!
//! Coefficient lists follow the graded monomial order of
//! [`crate::jets::monomials`]: constant, then `x0, x1, ...`, then
//! `x0^2, x0 x1, ...`.

use serde::{Deserialize, Serialize};

use crate::jets::monomials;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<(f64, Vec<u8>)>,
}

/// Number of monomials of degree `<= degree` in `nvars` variables.
pub fn basis_len(nvars: usize, degree: usize) -> usize {
    // C(nvars + degree, degree)
    (1..=degree).fold(1usize, |acc, k| acc * (nvars + k) / k)
}

impl Polynomial {
    /// Builds a polynomial from a coefficient list in graded order. The
    /// degree is inferred from the length, which must be a full basis size.
    pub fn from_coefficients(nvars: usize, coeffs: &[f64]) -> Option<Polynomial> {
        if nvars == 0 {
            return None;
        }
        let degree = (0..=8).find(|&d| basis_len(nvars, d) == coeffs.len())?;
        let terms = monomials(nvars, degree)
            .into_iter()
            .zip(coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(m, &c)| (c, m))
            .collect();
        Some(Polynomial { nvars, terms })
    }

    pub fn constant(nvars: usize, c: f64) -> Polynomial {
        Polynomial {
            nvars,
            terms: vec![(c, vec![0; nvars])],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, m)| m.iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let mut acc = x[0].constant_like(0.0);
        for (c, mono) in &self.terms {
            let mut term = x[0].constant_like(*c);
            for (xi, &e) in x.iter().zip(mono) {
                if e > 0 {
                    term = term * xi.powi(e as i32);
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Analytic partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|(_, m)| m[var] > 0)
            .map(|(c, m)| {
                let mut m = m.clone();
                let e = m[var];
                m[var] -= 1;
                (c * e as f64, m)
            })
            .collect();
        Polynomial {
            nvars: self.nvars,
            terms,
        }
    }
}
