//! Connection-level objects at a point of the tangent bundle.
//!
//! Everything is derived from one jet of `L` seeded in the `2n` induced
//! coordinates `(x, y)` (seeds `0..n` are base, `n..2n` fiber):
//!
//! - `g_ij = ½ ∂²L/∂y^i∂y^j`
//! - `γ^i_jk = ½ g^is (∂_k g_sj + ∂_j g_sk − ∂_s g_jk)` (base derivatives)
//! - `G^i = γ^i_jk y^j y^k`, `N^i_j = ½ ∂G^i/∂y^j`
//! - `Γ^i_jk = ½ g^is (δ_k g_sj + δ_j g_sk − δ_s g_jk)` with
//!   `δ_k = ∂/∂x^k − N^m_k ∂/∂y^m`
//! - `P^i_jkl = ∂Γ^i_jk/∂y^l`
//!
//! Each step consumes one derivative order, so a Chern jet of order `r`
//! needs `L` to order `r + 4`.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::jets::{jet_seed, JetScalar};
use crate::metrics::{MetricField, TangentSample};

/// `|det g|` at or below this is treated as degenerate.
pub const NONDEGENERACY_THRESHOLD: f64 = 1e-10;

/// Highest jet order retained on the Chern coefficients.
pub const MAX_CHERN_ORDER: usize = 1;

/// Jet-valued connection data at one tangent sample.
#[derive(Debug, Clone)]
pub struct ConnectionJets {
    dim: usize,
    order: usize,
    sample: TangentSample,
    lagrangian: JetScalar,
    metric: Vec<JetScalar>,
    inverse: Vec<JetScalar>,
    det: f64,
    formal: Vec<JetScalar>,
    spray: Vec<JetScalar>,
    nonlinear: Vec<JetScalar>,
    chern: Vec<JetScalar>,
}

/// Gauss-Jordan inversion with partial pivoting on values. Returns the
/// inverse and the determinant of the value matrix.
fn invert(mut a: Vec<JetScalar>, n: usize) -> (Vec<JetScalar>, f64) {
    let mut inv: Vec<JetScalar> = (0..n * n)
        .map(|idx| a[0].constant_like(if idx / n == idx % n { 1.0 } else { 0.0 }))
        .collect();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .value()
                    .abs()
                    .total_cmp(&a[s * n + col].value().abs())
            })
            .expect("nonempty pivot range");
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
                inv.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col].value();
        det *= p;
        if p == 0.0 {
            return (inv, 0.0);
        }
        let scale = a[col * n + col].recip();
        for c in 0..n {
            a[col * n + c] = &a[col * n + c] * &scale;
            inv[col * n + c] = &inv[col * n + c] * &scale;
        }
        for r in (0..n).filter(|&r| r != col) {
            let f = a[r * n + col].clone();
            for c in 0..n {
                a[r * n + c] = &a[r * n + c] - &(&f * &a[col * n + c]);
                inv[r * n + c] = &inv[r * n + c] - &(&f * &inv[col * n + c]);
            }
        }
    }
    (inv, det)
}

impl ConnectionJets {
    /// Computes the connection at `v`, keeping jets of order `order`
    /// (`0..=MAX_CHERN_ORDER`) on the Chern coefficients.
    pub fn compute(m: &MetricField, v: &TangentSample, order: usize) -> Result<Self> {
        assert!(
            order <= MAX_CHERN_ORDER,
            "Chern jets above order 1 need L beyond order 5"
        );
        m.check_sample(v)?;
        let n = m.dim();
        let seeds: Vec<f64> = v.x.iter().chain(&v.y).copied().collect();
        let vars = jet_seed(&seeds, order + 4)?;
        let lagrangian = m.lagrangian(&vars[..n], &vars[n..]);
        if !lagrangian.is_finite() {
            return Err(GeometryError::NonFinite("Lagrangian jet"));
        }

        let fiber_grad: Vec<JetScalar> = (0..n).map(|i| lagrangian.derivative(n + i)).collect();
        let mut metric = vec![lagrangian.constant_like(0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let gij = fiber_grad[i].derivative(n + j) * 0.5;
                metric[j * n + i] = gij.clone();
                metric[i * n + j] = gij;
            }
        }
        let (inverse, det) = invert(metric.clone(), n);
        if det.abs() <= NONDEGENERACY_THRESHOLD || !det.is_finite() {
            return Err(GeometryError::Degenerate { det });
        }

        // dg[(a*n + b)*n + c] = ∂g_ab/∂x^c
        let dg: Vec<JetScalar> = (0..n * n * n)
            .map(|idx| metric[idx / n].derivative(idx % n))
            .collect();
        let at = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let christoffel_type = |lowered: &dyn Fn(usize, usize, usize) -> JetScalar| {
            let mut out = Vec::with_capacity(n * n * n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc: Option<JetScalar> = None;
                        for s in 0..n {
                            let term = &inverse[i * n + s] * &lowered(s, j, k);
                            acc = Some(match acc {
                                None => term,
                                Some(a) => a + term,
                            });
                        }
                        out.push(acc.expect("n >= 1") * 0.5);
                    }
                }
            }
            out
        };

        let formal =
            christoffel_type(&|s, j, k| &(&dg[at(s, j, k)] + &dg[at(s, k, j)]) - &dg[at(j, k, s)]);

        let fiber: Vec<JetScalar> = vars[n..].iter().map(|y| y.truncate(order + 1)).collect();
        let spray: Vec<JetScalar> = (0..n)
            .map(|i| {
                let mut acc = fiber[0].constant_like(0.0);
                for j in 0..n {
                    for k in 0..n {
                        acc = acc + &(&formal[at(i, j, k)] * &fiber[j]) * &fiber[k];
                    }
                }
                acc
            })
            .collect();
        let nonlinear: Vec<JetScalar> = (0..n * n)
            .map(|idx| spray[idx / n].derivative(n + idx % n) * 0.5)
            .collect();

        // delta[(s*n + j)*n + k] = δ_k g_sj
        let delta: Vec<JetScalar> = (0..n * n * n)
            .map(|idx| {
                let (sj, k) = (idx / n, idx % n);
                let mut acc = dg[idx].truncate(order);
                for mm in 0..n {
                    acc = acc - &nonlinear[mm * n + k] * &metric[sj].derivative(n + mm);
                }
                acc
            })
            .collect();
        let chern = christoffel_type(&|s, j, k| {
            &(&delta[at(s, j, k)] + &delta[at(s, k, j)]) - &delta[at(j, k, s)]
        });

        let jets = ConnectionJets {
            dim: n,
            order,
            sample: v.clone(),
            lagrangian,
            metric,
            inverse,
            det,
            formal,
            spray,
            nonlinear,
            chern,
        };
        if !jets.chern.iter().all(JetScalar::is_finite) {
            return Err(GeometryError::NonFinite("Chern coefficients"));
        }
        Ok(jets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Jet order retained on the Chern coefficients.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sample(&self) -> &TangentSample {
        &self.sample
    }

    fn at3(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn lagrangian(&self) -> f64 {
        self.lagrangian.value()
    }

    pub fn metric(&self, i: usize, j: usize) -> f64 {
        self.metric[i * self.dim + j].value()
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    pub fn inverse_metric(&self, i: usize, j: usize) -> f64 {
        self.inverse[i * self.dim + j].value()
    }

    pub fn formal(&self, i: usize, j: usize, k: usize) -> f64 {
        self.formal[self.at3(i, j, k)].value()
    }

    pub fn spray(&self, i: usize) -> f64 {
        self.spray[i].value()
    }

    pub fn nonlinear(&self, i: usize, j: usize) -> f64 {
        self.nonlinear[i * self.dim + j].value()
    }

    /// `∂N^i_j/∂y^l`; needs order >= 1.
    pub fn nonlinear_dy(&self, i: usize, j: usize, l: usize) -> f64 {
        self.nonlinear[i * self.dim + j].first(self.dim + l)
    }

    /// `Γ^i_jk` as a jet over the `2n` seeds `(x, y)`.
    pub fn chern_jet(&self, i: usize, j: usize, k: usize) -> &JetScalar {
        &self.chern[self.at3(i, j, k)]
    }

    pub fn chern(&self, i: usize, j: usize, k: usize) -> f64 {
        self.chern[self.at3(i, j, k)].value()
    }

    /// `∂Γ^i_jk/∂x^p`; needs order >= 1.
    pub fn chern_dx(&self, i: usize, j: usize, k: usize, p: usize) -> f64 {
        self.chern[self.at3(i, j, k)].first(p)
    }

    /// `P^i_jkl = ∂Γ^i_jk/∂y^l`; needs order >= 1.
    pub fn chern_tensor(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.chern[self.at3(i, j, k)].first(self.dim + l)
    }

    /// `g_v(a, b)`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.metric(i, j) * a[i] * b[j];
            }
        }
        acc
    }

    /// `Γ^k_ij a^i b^j`.
    pub fn chern_apply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.chern(k, i, j) * a[i] * b[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// `P_v(a, b, c)^i = P^i_jkl a^j b^k c^l`.
    pub fn chern_tensor_apply(&self, a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        let ab = a[j] * b[k];
                        if ab == 0.0 {
                            continue;
                        }
                        for l in 0..n {
                            acc += self.chern_tensor(i, j, k, l) * ab * c[l];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// Plain-number snapshot. Needs order >= 1 for the Chern tensor.
    pub fn bundle(&self) -> ConnectionBundle {
        let n = self.dim;
        let r = 0..n;
        ConnectionBundle {
            lagrangian: self.lagrangian(),
            g: r.clone()
                .map(|i| r.clone().map(|j| self.metric(i, j)).collect())
                .collect(),
            gamma: tensor3(n, |i, j, k| self.formal(i, j, k)),
            spray: r.clone().map(|i| self.spray(i)).collect(),
            nonlinear: r
                .clone()
                .map(|i| r.clone().map(|j| self.nonlinear(i, j)).collect())
                .collect(),
            chern: tensor3(n, |i, j, k| self.chern(i, j, k)),
            chern_tensor: (0..n)
                .map(|i| tensor3(n, |j, k, l| self.chern_tensor(i, j, k, l)))
                .collect(),
        }
    }
}

fn tensor3(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Vec<Vec<Vec<f64>>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| f(i, j, k)).collect())
                .collect()
        })
        .collect()
}

/// All connection objects at one sample, as plain numbers.
///
/// Index conventions: `gamma[i][j][k] = γ^i_jk`, `chern[i][j][k] = Γ^i_jk`,
/// `chern_tensor[i][j][k][l] = P^i_jkl`, `nonlinear[i][j] = N^i_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionBundle {
    #[serde(rename = "L")]
    pub lagrangian: f64,
    pub g: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "G")]
    pub spray: Vec<f64>,
    #[serde(rename = "N")]
    pub nonlinear: Vec<Vec<f64>>,
    #[serde(rename = "Gamma")]
    pub chern: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "P")]
    pub chern_tensor: Vec<Vec<Vec<Vec<f64>>>>,
}

/// Evaluates the whole connection stack at `v` from one order-5 jet of `L`.
pub fn connection_bundle(m: &MetricField, v: &TangentSample) -> Result<ConnectionBundle> {
    Ok(ConnectionJets::compute(m, v, 1)?.bundle())
}

/// `g_ij(v)`.
pub fn fundamental_tensor(m: &MetricField, v: &TangentSample) -> Result<Vec<Vec<f64>>> {
    Ok(connection_bundle(m, v)?.g)
}

/// `γ^i_jk(v)`.
pub fn formal_christoffel(m: &MetricField, v: &TangentSample) -> Result<Vec<Vec<Vec<f64>>>> {
    Ok(connection_bundle(m, v)?.gamma)
}

/// `G^i(v)`.
pub fn spray_coefficients(m: &MetricField, v: &TangentSample) -> Result<Vec<f64>> {
    Ok(connection_bundle(m, v)?.spray)
}

/// `N^i_j(v)`.
pub fn nonlinear_connection(m: &MetricField, v: &TangentSample) -> Result<Vec<Vec<f64>>> {
    Ok(connection_bundle(m, v)?.nonlinear)
}

/// `Γ^i_jk(v)`.
pub fn chern_coefficients(m: &MetricField, v: &TangentSample) -> Result<Vec<Vec<Vec<f64>>>> {
    Ok(connection_bundle(m, v)?.chern)
}

/// `P^i_jkl(v)`.
pub fn chern_tensor(m: &MetricField, v: &TangentSample) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    Ok(connection_bundle(m, v)?.chern_tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::make_metric;

    fn sample(x: [f64; 2], y: [f64; 2]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec())
    }

    fn max_abs3(t: &[Vec<Vec<f64>>]) -> f64 {
        t.iter()
            .flatten()
            .flatten()
            .fold(0.0, |a, b| a.max(b.abs()))
    }

    #[test]
    fn euclidean_bundle_is_flat() {
        let m = make_metric("euclidean", 2, &[]).unwrap();
        let b = connection_bundle(&m, &sample([0.0, 0.0], [1.0, 0.0])).unwrap();
        assert_eq!(b.g, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(max_abs3(&b.gamma), 0.0);
        assert_eq!(max_abs3(&b.chern), 0.0);
        assert!(b.spray.iter().all(|&v| v == 0.0));
        assert!(b.nonlinear.iter().flatten().all(|&v| v == 0.0));
        assert!(b
            .chern_tensor
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn constant_riemannian_metric_is_its_own_tensor() {
        let m = crate::metrics::riemannian_from_matrix(&[
            vec![vec![2.0], vec![0.5]],
            vec![vec![0.5], vec![-1.0]],
        ])
        .unwrap();
        let g = fundamental_tensor(&m, &sample([0.3, -0.2], [1.0, 0.2])).unwrap();
        assert_eq!(g, vec![vec![2.0, 0.5], vec![0.5, -1.0]]);
    }

    #[test]
    fn randers_hessian_matches_finite_differences() {
        let m = make_metric("randers", 2, &[0.3, 0.0]).unwrap();
        let v = sample([0.0, 0.0], [1.0, 0.0]);
        let g = fundamental_tensor(&m, &v).unwrap();
        let h = 1e-5;
        let l = |y0: f64, y1: f64| m.lagrangian(&v.x, &[y0, y1]);
        let (a, b) = (v.y[0], v.y[1]);
        let fd = [
            [
                (l(a + h, b) - 2.0 * l(a, b) + l(a - h, b)) / (h * h),
                (l(a + h, b + h) - l(a + h, b - h) - l(a - h, b + h) + l(a - h, b - h))
                    / (4.0 * h * h),
            ],
            [0.0, (l(a, b + h) - 2.0 * l(a, b) + l(a, b - h)) / (h * h)],
        ];
        let fd01 = fd[0][1];
        let fd = [[fd[0][0], fd01], [fd01, fd[1][1]]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[i][j] - 0.5 * fd[i][j]).abs() < 1e-6, "g[{i}][{j}]");
            }
        }
    }

    #[test]
    fn locally_minkowski_randers_has_flat_spray() {
        let m = make_metric("randers", 2, &[0.2, -0.3]).unwrap();
        let b = connection_bundle(&m, &sample([0.4, 0.1], [0.3, 0.8])).unwrap();
        assert_eq!(max_abs3(&b.gamma), 0.0);
        assert_eq!(max_abs3(&b.chern), 0.0);
    }

    #[test]
    fn sphere_spray_vanishes_at_origin() {
        let m = make_metric("sphere2", 2, &[]).unwrap();
        let g = spray_coefficients(&m, &sample([0.0, 0.0], [0.7, -0.4])).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
        // Away from the origin the conformal factor has a gradient.
        let g = spray_coefficients(&m, &sample([0.5, 0.0], [0.7, -0.4])).unwrap();
        assert!(g.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn randers_invariants() {
        let m = make_metric("randers", 2, &[]).unwrap();
        let v = sample([0.2, -0.5], [0.6, 0.9]);
        let c = ConnectionJets::compute(&m, &v, 1).unwrap();
        let n = 2;
        for i in 0..n {
            for k in 0..n {
                let contracted: f64 = (0..n).map(|j| v.y[j] * c.chern(i, j, k)).sum();
                assert!((contracted - c.nonlinear(i, k)).abs() < 1e-12);
                // Euler relation for the 1-homogeneous N.
                let euler: f64 = (0..n).map(|l| v.y[l] * c.nonlinear_dy(i, k, l)).sum();
                assert!((euler - c.nonlinear(i, k)).abs() < 1e-12);
                for j in 0..n {
                    assert_eq!(c.chern(i, j, k), c.chern(i, k, j));
                    let py: f64 = (0..n).map(|l| c.chern_tensor(i, j, k, l) * v.y[l]).sum();
                    assert!(py.abs() < 1e-12);
                }
                let yyp: f64 = (0..n)
                    .flat_map(|j| (0..n).map(move |kk| (j, kk)))
                    .map(|(j, kk)| v.y[j] * v.y[kk] * c.chern_tensor(i, j, kk, k))
                    .sum();
                assert!(yyp.abs() < 1e-12);
            }
        }
        assert!((c.inner(&v.y, &v.y) - c.lagrangian()).abs() < 1e-12);
    }

    #[test]
    fn homogeneity_degrees() {
        let m = make_metric("randers", 2, &[]).unwrap();
        let v = sample([0.1, 0.3], [-0.4, 0.7]);
        let b1 = connection_bundle(&m, &v).unwrap();
        for lambda in [0.5, 2.0] {
            let b2 = connection_bundle(&m, &v.scaled(lambda)).unwrap();
            for i in 0..2 {
                assert!((b2.spray[i] - lambda * lambda * b1.spray[i]).abs() < 1e-12);
                for j in 0..2 {
                    assert!((b2.g[i][j] - b1.g[i][j]).abs() < 1e-12);
                    assert!((b2.nonlinear[i][j] - lambda * b1.nonlinear[i][j]).abs() < 1e-12);
                    for k in 0..2 {
                        assert!((b2.chern[i][j][k] - b1.chern[i][j][k]).abs() < 1e-12);
                        for l in 0..2 {
                            let p1 = b1.chern_tensor[i][j][k][l];
                            let p2 = b2.chern_tensor[i][j][k][l];
                            assert!((p2 - p1 / lambda).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn individual_operations_match_bundle() {
        let m = make_metric("funk", 2, &[]).unwrap();
        let v = sample([0.3, -0.1], [0.2, 0.5]);
        let b = connection_bundle(&m, &v).unwrap();
        assert_eq!(fundamental_tensor(&m, &v).unwrap(), b.g);
        assert_eq!(formal_christoffel(&m, &v).unwrap(), b.gamma);
        assert_eq!(spray_coefficients(&m, &v).unwrap(), b.spray);
        assert_eq!(nonlinear_connection(&m, &v).unwrap(), b.nonlinear);
        assert_eq!(chern_coefficients(&m, &v).unwrap(), b.chern);
        assert_eq!(chern_tensor(&m, &v).unwrap(), b.chern_tensor);
    }

    #[test]
    fn degenerate_and_inadmissible_inputs() {
        let m = make_metric("randers", 2, &[]).unwrap();
        assert!(matches!(
            connection_bundle(&m, &sample([0.0, 0.0], [0.0, 0.0])),
            Err(GeometryError::Inadmissible { .. })
        ));
        // G = diag(1, 0) is singular.
        let singular = crate::metrics::riemannian_from_matrix(&[
            vec![vec![1.0], vec![0.0]],
            vec![vec![0.0], vec![0.0]],
        ])
        .unwrap();
        assert!(matches!(
            connection_bundle(&singular, &sample([0.0, 0.0], [1.0, 0.0])),
            Err(GeometryError::Degenerate { .. })
        ));
    }
}
