//! Independent oracles for the integration tests.
//!
//! The Levi-Civita oracle works from the analytic polynomial entries of a
//! `riemannian_poly` metric and never touches the jet engine.

#![allow(dead_code, clippy::needless_range_loop)]

use finsler::polynomial::Polynomial;
use finsler::MetricField;
use nalgebra::DMatrix;

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

pub fn relative(a: &[f64], b: &[f64]) -> f64 {
    max_diff(a, b) / (1.0 + max_abs(a) + max_abs(b))
}

/// Christoffel symbols and their first derivatives at one point.
pub struct LeviCivita {
    pub n: usize,
    /// `gamma[k][i][j]`
    pub gamma: Vec<Vec<Vec<f64>>>,
    /// `dgamma[p][k][i][j] = ∂_p Γ^k_ij`
    pub dgamma: Vec<Vec<Vec<Vec<f64>>>>,
}

fn matrix(entries: &[Polynomial], n: usize, x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| entries[i * n + j].eval(x))
}

impl LeviCivita {
    pub fn at(m: &MetricField, x: &[f64]) -> LeviCivita {
        let n = m.dim();
        let entries = m.riemannian_matrix().expect("riemannian_poly metric");
        let d1: Vec<Vec<Polynomial>> = (0..n)
            .map(|p| entries.iter().map(|e| e.derivative(p)).collect())
            .collect();
        let g = matrix(entries, n, x);
        let ginv = g.clone().try_inverse().expect("invertible metric");
        let dg: Vec<DMatrix<f64>> = d1.iter().map(|d| matrix(d, n, x)).collect();
        let ddg: Vec<Vec<DMatrix<f64>>> = (0..n)
            .map(|p| {
                (0..n)
                    .map(|q| {
                        let e: Vec<Polynomial> = d1[q].iter().map(|e| e.derivative(p)).collect();
                        matrix(&e, n, x)
                    })
                    .collect()
            })
            .collect();
        // first kind: c[l][i][j] = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij)
        let c =
            |l: usize, i: usize, j: usize| 0.5 * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
        let dc = |p: usize, l: usize, i: usize, j: usize| {
            0.5 * (ddg[p][i][(l, j)] + ddg[p][j][(l, i)] - ddg[p][l][(i, j)])
        };
        let dginv: Vec<DMatrix<f64>> = dg.iter().map(|d| -&ginv * d * &ginv).collect();
        let gamma = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| (0..n).map(|l| ginv[(k, l)] * c(l, i, j)).sum())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let dgamma = (0..n)
            .map(|p| {
                (0..n)
                    .map(|k| {
                        (0..n)
                            .map(|i| {
                                (0..n)
                                    .map(|j| {
                                        (0..n)
                                            .map(|l| {
                                                dginv[p][(k, l)] * c(l, i, j)
                                                    + ginv[(k, l)] * dc(p, l, i, j)
                                            })
                                            .sum()
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        LeviCivita { n, gamma, dgamma }
    }

    /// `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z` for constant coordinate
    /// fields.
    pub fn riemann(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let (g, dg) = (&self.gamma, &self.dgamma);
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for p in 0..n {
                    for j in 0..n {
                        for i in 0..n {
                            let w = x[p] * y[j] * z[i];
                            let mut term = dg[p][k][j][i] - dg[j][k][p][i];
                            for l in 0..n {
                                term += g[k][p][l] * g[l][j][i] - g[k][j][l] * g[l][p][i];
                            }
                            acc += w * term;
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `Γ(a, b)^k = Γ^k_ij a^i b^j`.
    pub fn apply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| self.gamma[k][i][j] * a[i] * b[j])
                    .sum()
            })
            .collect()
    }
}

/// Gauss curvature of a 2D Riemannian metric from the oracle.
pub fn gauss_curvature(m: &MetricField, x: &[f64]) -> f64 {
    let lc = LeviCivita::at(m, x);
    let (e1, e2) = ([1.0, 0.0], [0.0, 1.0]);
    let r = lc.riemann(&e1, &e2, &e2);
    let g = matrix(m.riemannian_matrix().unwrap(), 2, x);
    let num = (0..2).map(|k| g[(k, 0)] * r[k]).sum::<f64>();
    num / g.determinant()
}

/// Full symmetric coefficient matrix for a quadratic `G(x)` in two
/// variables, kept positive definite on the unit box.
pub fn quadratic_metric_2d(a: [f64; 6], b: [f64; 6], c: [f64; 6]) -> Vec<Vec<Vec<f64>>> {
    vec![vec![a.to_vec(), b.to_vec()], vec![b.to_vec(), c.to_vec()]]
}
