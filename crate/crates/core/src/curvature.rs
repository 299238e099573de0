//! Pointwise curvature: the affine curvature `R^V` of `∇^V`, the Chern
//! curvature `R_v`, and the flag-curvature predecessor `K_v(u, w)`.
//!
//! `R_v` is obtained from `R^V` for the constant extension `V ≡ v` by
//! removing the Chern-tensor terms:
//!
//! `R_V(X,Y)Z = R^V(X,Y)Z − P_V(Y,Z,∇^V_X V) + P_V(X,Z,∇^V_Y V)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::connection::ConnectionJets;
use crate::error::{GeometryError, Result};
use crate::jets::{jet_seed, JetScalar};
use crate::metrics::{MetricField, TangentSample};
use crate::polynomial::Polynomial;

/// Relative threshold on the flag denominator.
pub const FLAG_DEGENERACY: f64 = 1e-10;

type FieldFn = dyn Fn(&[JetScalar]) -> Vec<JetScalar> + Send + Sync;

/// A smooth vector field on the chart, evaluable over jets in `x`.
#[derive(Clone)]
pub struct ChartVectorField {
    name: String,
    dim: usize,
    f: Arc<FieldFn>,
}

impl fmt::Debug for ChartVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartVectorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

/// Value and first derivatives of a vector field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet {
    /// Seeds `0..n` are the chart coordinates around the point.
    pub components: Vec<JetScalar>,
}

impl FieldJet {
    pub fn value(&self) -> Vec<f64> {
        self.components.iter().map(JetScalar::value).collect()
    }

    /// `∂V^k/∂u^p`.
    pub fn partial(&self, k: usize, p: usize) -> f64 {
        self.components[k].first(p)
    }
}

impl ChartVectorField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[JetScalar]) -> Vec<JetScalar> + Send + Sync + 'static,
    ) -> Self {
        ChartVectorField {
            name: name.into(),
            dim,
            f: Arc::new(f),
        }
    }

    pub fn constant(name: impl Into<String>, values: Vec<f64>) -> Self {
        let dim = values.len();
        Self::new(name, dim, move |x| {
            values.iter().map(|&c| x[0].constant_like(c)).collect()
        })
    }

    /// Components are polynomials in `x − center`.
    pub fn polynomial_about(
        name: impl Into<String>,
        center: Vec<f64>,
        components: Vec<Polynomial>,
    ) -> Self {
        let dim = components.len();
        Self::new(name, dim, move |x| {
            let shifted: Vec<JetScalar> = x.iter().zip(&center).map(|(xi, c)| xi - *c).collect();
            components.iter().map(|p| p.eval(&shifted)).collect()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates over arbitrary jets in the chart coordinates.
    pub fn eval_jets(&self, x: &[JetScalar]) -> Vec<JetScalar> {
        (self.f)(x)
    }

    /// First-order jet of the field at `x`.
    pub fn jet_at(&self, x: &[f64]) -> Result<FieldJet> {
        let seeds = jet_seed(x, 1)?;
        let components = self.eval_jets(&seeds);
        if components.len() != x.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: x.len(),
                got: components.len(),
            });
        }
        if !components.iter().all(JetScalar::is_finite) {
            return Err(GeometryError::NonFinite("vector field"));
        }
        Ok(FieldJet { components })
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet_at(x)?.value())
    }
}

/// `(∇^V_X V)^k = X^p ∂V^k/∂u^p + X^p V^l Γ^k_pl(V)`, with `conn` evaluated
/// at `(x, V(x))`.
pub fn nabla_along(conn: &ConnectionJets, field: &FieldJet, x_dir: &[f64]) -> Vec<f64> {
    let n = conn.dim();
    let v = field.value();
    let twist = conn.chern_apply(x_dir, &v);
    (0..n)
        .map(|k| (0..n).map(|p| x_dir[p] * field.partial(k, p)).sum::<f64>() + twist[k])
        .collect()
}

/// `R^V(X,Y)Z` from the coordinate expression of the affine curvature, with
/// `Γ̃^k_ij(p) = Γ^k_ij(p, V(p))` differentiated through `V`.
///
/// `conn` must be evaluated at `(x, V(x))` with order >= 1.
pub fn affine_curvature_at(
    conn: &ConnectionJets,
    field: &FieldJet,
    x_dir: &[f64],
    y_dir: &[f64],
    z_dir: &[f64],
) -> Result<Vec<f64>> {
    let n = conn.dim();
    let base = jet_seed(&conn.sample().x, 1)?;
    let inner: Vec<JetScalar> = base
        .into_iter()
        .chain(field.components.iter().map(|c| c.truncate(1)))
        .collect();
    // dtilde[((k*n + i)*n + j)*n + p] = ∂Γ̃^k_ij/∂u^p
    let mut dtilde = vec![0.0; n * n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let composed = conn.chern_jet(k, i, j).compose(&inner)?;
                for p in 0..n {
                    dtilde[((k * n + i) * n + j) * n + p] = composed.first(p);
                }
            }
        }
    }
    let dt = |k: usize, i: usize, j: usize, p: usize| dtilde[((k * n + i) * n + j) * n + p];
    let out = (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for p in 0..n {
                        acc += z_dir[i] * y_dir[j] * x_dir[p] * dt(k, i, j, p)
                            - z_dir[i] * x_dir[j] * y_dir[p] * dt(k, i, j, p);
                    }
                    for m in 0..n {
                        let zyx = z_dir[i] * y_dir[j] * x_dir[m];
                        if zyx == 0.0 {
                            continue;
                        }
                        for l in 0..n {
                            acc += zyx
                                * (conn.chern(l, i, j) * conn.chern(k, l, m)
                                    - conn.chern(l, i, m) * conn.chern(k, l, j));
                        }
                    }
                }
            }
            acc
        })
        .collect();
    Ok(out)
}

fn check_chart(m: &MetricField, x: &[f64]) -> Result<()> {
    m.check_dims(x)?;
    if m.contains(x) {
        Ok(())
    } else {
        Err(GeometryError::OutsideChart { x: x.to_vec() })
    }
}

/// `R^V(X,Y)Z` at `x` for chart vector fields.
pub fn affine_curvature_rv(
    m: &MetricField,
    v_field: &ChartVectorField,
    x_field: &ChartVectorField,
    y_field: &ChartVectorField,
    z_field: &ChartVectorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    check_chart(m, x)?;
    let v = v_field.jet_at(x)?;
    let conn = ConnectionJets::compute(m, &TangentSample::new(x.to_vec(), v.value()), 1)?;
    affine_curvature_at(
        &conn,
        &v,
        &x_field.value(x)?,
        &y_field.value(x)?,
        &z_field.value(x)?,
    )
}

/// Constant extension of the reference vector of `conn`, as a field jet.
fn constant_extension(conn: &ConnectionJets) -> FieldJet {
    let n = conn.dim();
    FieldJet {
        components: conn
            .sample()
            .y
            .iter()
            .map(|&c| JetScalar::constant(n, 1, c))
            .collect(),
    }
}

/// `R_v(X,Y)Z` with `conn` evaluated at `v` (order >= 1).
pub fn chern_curvature_at(
    conn: &ConnectionJets,
    x_dir: &[f64],
    y_dir: &[f64],
    z_dir: &[f64],
) -> Result<Vec<f64>> {
    let ext = constant_extension(conn);
    let affine = affine_curvature_at(conn, &ext, x_dir, y_dir, z_dir)?;
    let along_x = nabla_along(conn, &ext, x_dir);
    let along_y = nabla_along(conn, &ext, y_dir);
    let p_x = conn.chern_tensor_apply(y_dir, z_dir, &along_x);
    let p_y = conn.chern_tensor_apply(x_dir, z_dir, &along_y);
    Ok((0..conn.dim())
        .map(|k| affine[k] - p_x[k] + p_y[k])
        .collect())
}

/// `R_v(X,Y)Z` for tangent vectors at `π(v)`.
pub fn chern_curvature(
    m: &MetricField,
    v: &TangentSample,
    x_dir: &[f64],
    y_dir: &[f64],
    z_dir: &[f64],
) -> Result<Vec<f64>> {
    for d in [x_dir, y_dir, z_dir] {
        m.check_dims(d)?;
    }
    let conn = ConnectionJets::compute(m, v, 1)?;
    chern_curvature_at(&conn, x_dir, y_dir, z_dir)
}

/// `R_v(v,u)w`.
pub fn chern_curvature_rv(
    m: &MetricField,
    v: &TangentSample,
    u: &[f64],
    w: &[f64],
) -> Result<Vec<f64>> {
    chern_curvature(m, v, &v.y, u, w)
}

/// Flag-curvature predecessor with its numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagResult {
    #[serde(rename = "K")]
    pub k: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// `L(v) g_v(u,w) − g_v(v,u) g_v(v,w)`, rejected when small relative to the
/// size of its terms.
pub fn flag_denominator(conn: &ConnectionJets, u: &[f64], w: &[f64]) -> Result<f64> {
    let v = &conn.sample().y;
    let l = conn.lagrangian();
    let (vu, vw) = (conn.inner(v, u), conn.inner(v, w));
    let denominator = l * conn.inner(u, w) - vu * vw;
    let scale =
        (l * conn.inner(u, u)).abs().sqrt() * (l * conn.inner(w, w)).abs().sqrt() + (vu * vw).abs();
    if denominator.abs() <= FLAG_DEGENERACY * scale || denominator == 0.0 {
        return Err(GeometryError::DegenerateFlag { denominator });
    }
    Ok(denominator)
}

/// `K_v(u,w) = g_v(R_v(v,u)w, v) / (L(v) g_v(u,w) − g_v(v,u) g_v(v,w))`.
pub fn flag_predecessor_at(conn: &ConnectionJets, u: &[f64], w: &[f64]) -> Result<FlagResult> {
    let denominator = flag_denominator(conn, u, w)?;
    let v = &conn.sample().y;
    let r = chern_curvature_at(conn, v, u, w)?;
    let numerator = conn.inner(&r, v);
    Ok(FlagResult {
        k: numerator / denominator,
        numerator,
        denominator,
    })
}

pub fn flag_predecessor(
    m: &MetricField,
    v: &TangentSample,
    u: &[f64],
    w: &[f64],
) -> Result<FlagResult> {
    m.check_dims(u)?;
    m.check_dims(w)?;
    let conn = ConnectionJets::compute(m, v, 1)?;
    flag_predecessor_at(&conn, u, w)
}
