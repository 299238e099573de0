//! Finite-difference oracles for the jet-derived quantities.

use std::fmt;
use std::str::FromStr;

use super::{assemble, Outcome, ResidualReport, Result, VerifyError};
use crate::connection::ConnectionJets;
use crate::curvature::{flag_denominator, FlagResult};
use crate::jets::jet_seed;
use crate::metrics::{MetricField, TangentSample};

/// Relative tolerance of a cross-check report.
pub const FD_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdQuantity {
    /// `g_ij` against differences of `∂L/∂y`.
    Metric,
    /// `γ^i_jk` against differences of `g` in `x`.
    Formal,
    /// `G^i` contracted from the difference-built `γ`.
    Spray,
    /// `N^i_j` against differences of `G` in `y`.
    Nonlinear,
    /// `Γ^i_jk` against `δ`-derivatives of `g` built from differences.
    Chern,
    /// `P^i_jkl` against differences of `Γ` in `y`.
    ChernTensor,
}

impl FdQuantity {
    pub const ALL: [FdQuantity; 6] = [
        FdQuantity::Metric,
        FdQuantity::Formal,
        FdQuantity::Spray,
        FdQuantity::Nonlinear,
        FdQuantity::Chern,
        FdQuantity::ChernTensor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FdQuantity::Metric => "g",
            FdQuantity::Formal => "gamma",
            FdQuantity::Spray => "G",
            FdQuantity::Nonlinear => "N",
            FdQuantity::Chern => "Gamma",
            FdQuantity::ChernTensor => "P",
        }
    }
}

impl fmt::Display for FdQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FdQuantity {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self> {
        FdQuantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| VerifyError::InvalidCase(format!("unknown quantity '{s}'")))
    }
}

fn shifted(v: &TangentSample, slot: usize, h: f64) -> TangentSample {
    let mut out = v.clone();
    let n = v.x.len();
    if slot < n {
        out.x[slot] += h;
    } else {
        out.y[slot - n] += h;
    }
    out
}

/// `(f(v + h e_slot) − f(v − h e_slot)) / 2h`; slots `0..n` are `x`,
/// `n..2n` are `y`.
fn central(
    v: &TangentSample,
    slot: usize,
    h: f64,
    f: &dyn Fn(&TangentSample) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let plus = f(&shifted(v, slot, h))?;
    let minus = f(&shifted(v, slot, -h))?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, q)| (p - q) / (2.0 * h))
        .collect())
}

fn conn0(m: &MetricField, v: &TangentSample) -> Result<ConnectionJets> {
    Ok(ConnectionJets::compute(m, v, 0)?)
}

fn metric_entries(m: &MetricField, v: &TangentSample) -> Result<Vec<f64>> {
    let c = conn0(m, v)?;
    let n = c.dim();
    Ok((0..n * n).map(|a| c.metric(a / n, a % n)).collect())
}

fn chern_entries(m: &MetricField, v: &TangentSample) -> Result<Vec<f64>> {
    let c = conn0(m, v)?;
    let n = c.dim();
    Ok((0..n * n * n)
        .map(|a| c.chern(a / (n * n), (a / n) % n, a % n))
        .collect())
}

/// `∂L/∂y^i` from a first-order jet.
fn fiber_gradient(m: &MetricField, v: &TangentSample) -> Result<Vec<f64>> {
    m.check_sample(v)?;
    let n = v.x.len();
    let seeds: Vec<f64> = v.x.iter().chain(&v.y).copied().collect();
    let vars = jet_seed(&seeds, 1).map_err(crate::error::GeometryError::from)?;
    let l = m.lagrangian(&vars[..n], &vars[n..]);
    Ok((0..n).map(|i| l.first(n + i)).collect())
}

/// `dg[(s*n + j)*n + k] = ∂g_sj/∂x^k` by central differences.
fn metric_dx(m: &MetricField, v: &TangentSample, h: f64) -> Result<Vec<f64>> {
    let n = v.x.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|k| central(v, k, h, &|s| metric_entries(m, s)))
        .collect::<Result<_>>()?;
    Ok((0..n * n * n).map(|a| cols[a % n][a / n]).collect())
}

/// Difference-built formal Christoffel symbols, `[(i*n + j)*n + k]`.
fn formal_fd(m: &MetricField, conn: &ConnectionJets, h: f64) -> Result<Vec<f64>> {
    let v = conn.sample();
    let n = conn.dim();
    let dg = metric_dx(m, v, h)?;
    let d = |s: usize, j: usize, k: usize| dg[(s * n + j) * n + k];
    Ok((0..n * n * n)
        .map(|a| {
            let (i, j, k) = (a / (n * n), (a / n) % n, a % n);
            0.5 * (0..n)
                .map(|s| conn.inverse_metric(i, s) * (d(s, j, k) + d(s, k, j) - d(j, k, s)))
                .sum::<f64>()
        })
        .collect())
}

/// Compares one jet-computed quantity at `v` with central differences of
/// the quantity it is derived from.
pub fn fd_cross_check(
    m: &MetricField,
    quantity: FdQuantity,
    v: &TangentSample,
    step: f64,
) -> Result<ResidualReport> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(VerifyError::InvalidCase(format!(
            "finite-difference step {step} outside [1e-7, 1e-3]"
        )));
    }
    let conn = ConnectionJets::compute(m, v, 1)?;
    let n = conn.dim();
    let h = step;
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = match quantity {
        FdQuantity::Metric => {
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|j| central(v, n + j, h, &|s| fiber_gradient(m, s)))
                .collect::<Result<_>>()?;
            (
                (0..n * n).map(|a| conn.metric(a / n, a % n)).collect(),
                (0..n * n).map(|a| 0.5 * cols[a % n][a / n]).collect(),
            )
        }
        FdQuantity::Formal => (
            (0..n * n * n)
                .map(|a| conn.formal(a / (n * n), (a / n) % n, a % n))
                .collect(),
            formal_fd(m, &conn, h)?,
        ),
        FdQuantity::Spray => {
            let gamma = formal_fd(m, &conn, h)?;
            let y = &v.y;
            (
                (0..n).map(|i| conn.spray(i)).collect(),
                (0..n)
                    .map(|i| {
                        (0..n * n)
                            .map(|a| gamma[i * n * n + a] * y[a / n] * y[a % n])
                            .sum()
                    })
                    .collect(),
            )
        }
        FdQuantity::Nonlinear => {
            let spray = |s: &TangentSample| -> Result<Vec<f64>> {
                let c = conn0(m, s)?;
                Ok((0..n).map(|i| c.spray(i)).collect())
            };
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|j| central(v, n + j, h, &spray))
                .collect::<Result<_>>()?;
            (
                (0..n * n).map(|a| conn.nonlinear(a / n, a % n)).collect(),
                (0..n * n).map(|a| 0.5 * cols[a % n][a / n]).collect(),
            )
        }
        FdQuantity::Chern => {
            let dx = metric_dx(m, v, h)?;
            let dy_cols: Vec<Vec<f64>> = (0..n)
                .map(|l| central(v, n + l, h, &|s| metric_entries(m, s)))
                .collect::<Result<_>>()?;
            // δ_p g_ab = ∂g_ab/∂x^p − N^l_p ∂g_ab/∂y^l
            let delta = |a: usize, b: usize, p: usize| {
                dx[(a * n + b) * n + p]
                    - (0..n)
                        .map(|l| conn.nonlinear(l, p) * dy_cols[l][a * n + b])
                        .sum::<f64>()
            };
            (
                (0..n * n * n)
                    .map(|a| conn.chern(a / (n * n), (a / n) % n, a % n))
                    .collect(),
                (0..n * n * n)
                    .map(|a| {
                        let (i, j, k) = (a / (n * n), (a / n) % n, a % n);
                        0.5 * (0..n)
                            .map(|s| {
                                conn.inverse_metric(i, s)
                                    * (delta(s, k, j) + delta(s, j, k) - delta(j, k, s))
                            })
                            .sum::<f64>()
                    })
                    .collect(),
            )
        }
        FdQuantity::ChernTensor => {
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|l| central(v, n + l, h, &|s| chern_entries(m, s)))
                .collect::<Result<_>>()?;
            (
                (0..n.pow(4))
                    .map(|a| {
                        conn.chern_tensor(a / (n * n * n), (a / (n * n)) % n, (a / n) % n, a % n)
                    })
                    .collect(),
                (0..n.pow(4)).map(|a| cols[a % n][a / n]).collect(),
            )
        }
    };
    let inputs = serde_json::json!({ "x": v.x, "y": v.y, "step": step });
    Ok(assemble(
        format!("FD_{}", quantity.as_str()),
        m.name().to_string(),
        0,
        FD_TOLERANCE,
        "lhs: jet derivative; rhs: central differences of the next-lower quantity",
        vec![Outcome::new(inputs, lhs, rhs)],
    ))
}

/// Chern curvature `R_v(X,Y)Z` from the horizontal derivatives
/// `δ_pΓ^k_ij = ∂Γ^k_ij/∂x^p − N^l_p ∂Γ^k_ij/∂y^l`.
///
/// `gamma(k,i,j)`, `dx(k,i,j,p)`, `dy(k,i,j,l)` and `nonlinear(l,p)` supply
/// the coefficients at `v`.
#[allow(clippy::too_many_arguments)]
pub fn delta_chern_curvature(
    n: usize,
    gamma: &dyn Fn(usize, usize, usize) -> f64,
    dx: &dyn Fn(usize, usize, usize, usize) -> f64,
    dy: &dyn Fn(usize, usize, usize, usize) -> f64,
    nonlinear: &dyn Fn(usize, usize) -> f64,
    x_dir: &[f64],
    y_dir: &[f64],
    z_dir: &[f64],
) -> Vec<f64> {
    let mut delta = vec![0.0; n.pow(4)];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                for p in 0..n {
                    let shift: f64 = (0..n).map(|l| nonlinear(l, p) * dy(k, i, j, l)).sum();
                    delta[((k * n + i) * n + j) * n + p] = dx(k, i, j, p) - shift;
                }
            }
        }
    }
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for p in 0..n {
                        let d = delta[((k * n + i) * n + j) * n + p];
                        acc += z_dir[i] * (y_dir[j] * x_dir[p] - x_dir[j] * y_dir[p]) * d;
                    }
                    for mm in 0..n {
                        for l in 0..n {
                            acc += z_dir[i]
                                * y_dir[j]
                                * x_dir[mm]
                                * (gamma(l, i, j) * gamma(k, l, mm)
                                    - gamma(l, i, mm) * gamma(k, l, j));
                        }
                    }
                }
            }
            acc
        })
        .collect()
}

/// Flag-curvature predecessor with `∂Γ` taken by central differences of
/// order-0 Chern coefficients.
pub fn fd_flag_predecessor(
    m: &MetricField,
    v: &TangentSample,
    u: &[f64],
    w: &[f64],
    step: f64,
) -> Result<FlagResult> {
    m.check_dims(u)?;
    m.check_dims(w)?;
    let conn = conn0(m, v)?;
    let n = conn.dim();
    let cols: Vec<Vec<f64>> = (0..2 * n)
        .map(|slot| central(v, slot, step, &|s| chern_entries(m, s)))
        .collect::<Result<_>>()?;
    let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    let r = delta_chern_curvature(
        n,
        &|k, i, j| conn.chern(k, i, j),
        &|k, i, j, p| cols[p][at(k, i, j)],
        &|k, i, j, l| cols[n + l][at(k, i, j)],
        &|l, p| conn.nonlinear(l, p),
        &v.y,
        u,
        w,
    );
    let denominator = flag_denominator(&conn, u, w)?;
    let numerator = conn.inner(&r, &v.y);
    Ok(FlagResult {
        k: numerator / denominator,
        numerator,
        denominator,
    })
}
