use std::fmt;
use std::sync::Arc;

use crate::connection::{ConnectionJets, MAX_CHERN_ORDER};
use crate::curvature::ChartVectorField;
use crate::error::{GeometryError, Result};
use crate::jets::{JetError, JetScalar};
use crate::metrics::{MetricField, TangentSample};

type CurveFn = dyn Fn(&JetScalar) -> Vec<JetScalar> + Send + Sync;
type MapFn = dyn Fn(&JetScalar, &JetScalar) -> Vec<JetScalar> + Send + Sync;

/// Seed index of a map parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    T,
    S,
}

impl Direction {
    fn seed(self) -> usize {
        match self {
            Direction::T => 0,
            Direction::S => 1,
        }
    }
}

fn check_components(out: &[JetScalar], dim: usize, what: &'static str) -> Result<()> {
    if out.len() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            got: out.len(),
        });
    }
    if !out.iter().all(JetScalar::is_finite) {
        return Err(GeometryError::NonFinite(what));
    }
    Ok(())
}

/// Seeds `(t, s)` as two-variable jets; order 0 is allowed.
fn seed_ts(t: f64, s: f64, order: usize) -> (JetScalar, JetScalar) {
    (
        JetScalar::variable(2, order, 0, t),
        JetScalar::variable(2, order, 1, s),
    )
}

/// A smooth curve `γ: [a, b] → chart`.
#[derive(Clone)]
pub struct CurvePath {
    dim: usize,
    domain: (f64, f64),
    f: Arc<CurveFn>,
}

impl fmt::Debug for CurvePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvePath")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl CurvePath {
    pub fn new(
        dim: usize,
        domain: (f64, f64),
        f: impl Fn(&JetScalar) -> Vec<JetScalar> + Send + Sync + 'static,
    ) -> Self {
        CurvePath {
            dim,
            domain,
            f: Arc::new(f),
        }
    }

    /// Component `k` is `Σ_j coeffs[k][j] (t − center)^j`.
    pub fn polynomial(domain: (f64, f64), center: f64, coeffs: Vec<Vec<f64>>) -> Self {
        let dim = coeffs.len();
        Self::new(dim, domain, move |t| {
            let dt = t - center;
            coeffs.iter().map(|c| horner(c, &dt)).collect()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let (a, b) = self.domain;
        if t.is_finite() && t >= a && t <= b {
            Ok(())
        } else {
            Err(GeometryError::OutsideDomain { t, s: 0.0 })
        }
    }

    /// Evaluates over an arbitrary jet in the curve parameter.
    pub fn eval_jet(&self, t: &JetScalar) -> Vec<JetScalar> {
        (self.f)(t)
    }

    /// Components as one-variable jets of `order` at `t`.
    pub fn jet(&self, t: f64, order: usize) -> Result<Vec<JetScalar>> {
        self.check_t(t)?;
        let out = self.eval_jet(&JetScalar::variable(1, order, 0, t));
        check_components(&out, self.dim, "curve")?;
        Ok(out)
    }

    pub fn position(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.jet(t, 0)?.iter().map(JetScalar::value).collect())
    }

    /// `(γ(t), γ̇(t), γ̈(t))`.
    pub fn kinematics(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let jet = self.jet(t, 2)?;
        let x = jet.iter().map(JetScalar::value).collect();
        let v = jet.iter().map(|c| c.first(0)).collect();
        let a = jet
            .iter()
            .map(|c| c.partial(&[2]).map_err(GeometryError::from))
            .collect::<Result<_>>()?;
        Ok((x, v, a))
    }
}

fn horner(c: &[f64], dt: &JetScalar) -> JetScalar {
    let mut acc = dt.constant_like(0.0);
    for &ci in c.iter().rev() {
        acc = &acc * dt + ci;
    }
    acc
}

/// A vector field along a curve, as a function of the curve parameter.
#[derive(Clone)]
pub struct FieldAlongCurve {
    dim: usize,
    f: Arc<CurveFn>,
}

impl fmt::Debug for FieldAlongCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldAlongCurve")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl FieldAlongCurve {
    pub fn new(
        dim: usize,
        f: impl Fn(&JetScalar) -> Vec<JetScalar> + Send + Sync + 'static,
    ) -> Self {
        FieldAlongCurve {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn polynomial(center: f64, coeffs: Vec<Vec<f64>>) -> Self {
        let dim = coeffs.len();
        Self::new(dim, move |t| {
            let dt = t - center;
            coeffs.iter().map(|c| horner(c, &dt)).collect()
        })
    }

    /// `γ̇` as a field along `γ`.
    pub fn velocity_of(curve: &CurvePath) -> Self {
        let curve = curve.clone();
        Self::new(curve.dim, move |t| {
            // Differentiate in a fresh parameter one order higher, then
            // substitute `t` back in.
            let local = JetScalar::variable(1, t.order() + 1, 0, t.value());
            curve
                .eval_jet(&local)
                .iter()
                .map(|c| {
                    c.derivative(0)
                        .compose(std::slice::from_ref(t))
                        .expect("one-variable composition")
                })
                .collect()
        })
    }

    /// The restriction `Ũ ∘ γ`.
    pub fn restrict(field: &ChartVectorField, curve: &CurvePath) -> Self {
        let field = field.clone();
        let curve = curve.clone();
        Self::new(curve.dim, move |t| field.eval_jets(&curve.eval_jet(t)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jet(&self, t: &JetScalar) -> Vec<JetScalar> {
        (self.f)(t)
    }

    pub fn jet(&self, t: f64, order: usize) -> Result<Vec<JetScalar>> {
        let out = self.eval_jet(&JetScalar::variable(1, order, 0, t));
        check_components(&out, self.dim, "field along curve")?;
        Ok(out)
    }

    pub fn value(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.jet(t, 0)?.iter().map(JetScalar::value).collect())
    }

    /// `(U(t), dU/dt)`.
    pub fn value_and_derivative(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let jet = self.jet(t, 1)?;
        Ok((
            jet.iter().map(JetScalar::value).collect(),
            jet.iter().map(|c| c.first(0)).collect(),
        ))
    }
}

/// Anything evaluable along a two-parameter map as jets in `(t, s)`.
pub trait AlongMap: Send + Sync {
    fn dim(&self) -> usize;
    /// Components at `(t, s)` as jets of `order` in the seeds `(t, s)`.
    fn jet(&self, t: f64, s: f64, order: usize) -> Result<Vec<JetScalar>>;
}

/// A smooth map `Λ: [a, b] × [−ε, ε] → chart`.
#[derive(Clone)]
pub struct TwoParameterMap {
    dim: usize,
    t_domain: (f64, f64),
    eps: f64,
    f: Arc<MapFn>,
}

impl fmt::Debug for TwoParameterMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoParameterMap")
            .field("dim", &self.dim)
            .field("t_domain", &self.t_domain)
            .field("eps", &self.eps)
            .finish_non_exhaustive()
    }
}

impl TwoParameterMap {
    pub fn new(
        dim: usize,
        t_domain: (f64, f64),
        eps: f64,
        f: impl Fn(&JetScalar, &JetScalar) -> Vec<JetScalar> + Send + Sync + 'static,
    ) -> Self {
        TwoParameterMap {
            dim,
            t_domain,
            eps,
            f: Arc::new(f),
        }
    }

    /// `Λ(t, s) = γ(t)`.
    pub fn from_curve(curve: &CurvePath) -> Self {
        let curve = curve.clone();
        Self::new(curve.dim, curve.domain, 1.0, move |t, _s| curve.eval_jet(t))
    }

    /// `Λ(t, s) = γ(t) + s U(t)`, with `ε` halved from `eps` until every
    /// point of a grid lies in the chart and `Λ_t` is admissible there.
    pub fn canonical_variation(
        m: &MetricField,
        curve: &CurvePath,
        u: &FieldAlongCurve,
        eps: f64,
    ) -> Result<Self> {
        let c = curve.clone();
        let field = u.clone();
        let mut map = Self::new(curve.dim, curve.domain, eps, move |t, s| {
            let x = c.eval_jet(t);
            let uu = field.eval_jet(t);
            x.iter().zip(&uu).map(|(xi, ui)| xi + &(s * ui)).collect()
        });
        for _ in 0..40 {
            if map.is_admissible_on_grid(m, 8) {
                return Ok(map);
            }
            map.eps *= 0.5;
        }
        let (t, s) = (curve.domain.0, 0.0);
        Err(GeometryError::Inadmissible {
            x: map.position(t, s).unwrap_or_default(),
            y: map
                .partial(Direction::T)
                .jet(t, s, 0)
                .map(values)
                .unwrap_or_default(),
        })
    }

    /// Checks `Λ` inside the chart and `Λ_t` admissible on a
    /// `(steps+1)²` grid.
    pub fn is_admissible_on_grid(&self, m: &MetricField, steps: usize) -> bool {
        let (a, b) = self.t_domain;
        let steps = steps.max(1);
        let velocity = self.partial(Direction::T);
        (0..=steps).all(|i| {
            let t = a + (b - a) * i as f64 / steps as f64;
            (0..=steps).all(|j| {
                let s = -self.eps + 2.0 * self.eps * j as f64 / steps as f64;
                match (self.position(t, s), velocity.jet(t, s, 0)) {
                    (Ok(x), Ok(v)) => m.contains(&x) && m.is_admissible(&x, &values(v)),
                    _ => false,
                }
            })
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_domain(&self) -> (f64, f64) {
        self.t_domain
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn check_domain(&self, t: f64, s: f64) -> Result<()> {
        let (a, b) = self.t_domain;
        if t.is_finite() && s.is_finite() && t >= a && t <= b && s.abs() <= self.eps {
            Ok(())
        } else {
            Err(GeometryError::OutsideDomain { t, s })
        }
    }

    pub fn position(&self, t: f64, s: f64) -> Result<Vec<f64>> {
        Ok(values(self.jet(t, s, 0)?))
    }

    /// `Λ_t` or `Λ_s`.
    pub fn partial(&self, direction: Direction) -> MapPartial<'_> {
        MapPartial {
            map: self,
            direction,
        }
    }
}

impl AlongMap for TwoParameterMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, t: f64, s: f64, order: usize) -> Result<Vec<JetScalar>> {
        self.check_domain(t, s)?;
        let (tj, sj) = seed_ts(t, s, order);
        let out = (self.f)(&tj, &sj);
        check_components(&out, self.dim, "two-parameter map")?;
        Ok(out)
    }
}

fn values(jets: Vec<JetScalar>) -> Vec<f64> {
    jets.iter().map(JetScalar::value).collect()
}

/// `∂Λ/∂t` or `∂Λ/∂s` as a field along the map.
#[derive(Debug, Clone, Copy)]
pub struct MapPartial<'a> {
    map: &'a TwoParameterMap,
    direction: Direction,
}

impl AlongMap for MapPartial<'_> {
    fn dim(&self) -> usize {
        self.map.dim
    }

    fn jet(&self, t: f64, s: f64, order: usize) -> Result<Vec<JetScalar>> {
        let lifted = self.map.jet(t, s, order + 1)?;
        Ok(lifted
            .iter()
            .map(|c| c.derivative(self.direction.seed()))
            .collect())
    }
}

/// A vector field along a map, as a function of `(t, s)`.
#[derive(Clone)]
pub struct FieldAlongMap {
    dim: usize,
    f: Arc<MapFn>,
}

impl fmt::Debug for FieldAlongMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldAlongMap")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl FieldAlongMap {
    pub fn new(
        dim: usize,
        f: impl Fn(&JetScalar, &JetScalar) -> Vec<JetScalar> + Send + Sync + 'static,
    ) -> Self {
        FieldAlongMap {
            dim,
            f: Arc::new(f),
        }
    }

    /// `W(t, s) = W(t)`.
    pub fn from_curve_field(field: &FieldAlongCurve) -> Self {
        let field = field.clone();
        Self::new(field.dim, move |t, _s| field.eval_jet(t))
    }

    /// `W(t, s) = W̃(Λ(t, s))`.
    pub fn restrict(field: &ChartVectorField, map: &TwoParameterMap) -> Self {
        let field = field.clone();
        let map = map.clone();
        Self::new(map.dim, move |t, s| field.eval_jets(&(map.f)(t, s)))
    }

    /// Evaluates over arbitrary jets in `(t, s)`.
    pub fn eval_jets(&self, t: &JetScalar, s: &JetScalar) -> Vec<JetScalar> {
        (self.f)(t, s)
    }
}

impl AlongMap for FieldAlongMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, t: f64, s: f64, order: usize) -> Result<Vec<JetScalar>> {
        let (tj, sj) = seed_ts(t, s, order);
        let out = (self.f)(&tj, &sj);
        check_components(&out, self.dim, "field along map")?;
        Ok(out)
    }
}

/// `D_τ W` along `Λ` with reference field `ρ`:
/// `∂W^k/∂τ + W^i (∂Λ^j/∂τ) Γ^k_ij(Λ, ρ)`.
#[derive(Clone, Copy)]
pub struct CovariantDerivative<'a> {
    metric: &'a MetricField,
    map: &'a TwoParameterMap,
    field: &'a dyn AlongMap,
    reference: &'a dyn AlongMap,
    direction: Direction,
}

impl fmt::Debug for CovariantDerivative<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CovariantDerivative")
            .field("direction", &self.direction)
            .finish_non_exhaustive()
    }
}

pub fn covariant_derivative_along<'a>(
    metric: &'a MetricField,
    map: &'a TwoParameterMap,
    field: &'a dyn AlongMap,
    reference: &'a dyn AlongMap,
    direction: Direction,
) -> CovariantDerivative<'a> {
    CovariantDerivative {
        metric,
        map,
        field,
        reference,
        direction,
    }
}

impl AlongMap for CovariantDerivative<'_> {
    fn dim(&self) -> usize {
        self.map.dim
    }

    /// Supports `order <= 1`, the jet order of the Chern coefficients.
    fn jet(&self, t: f64, s: f64, order: usize) -> Result<Vec<JetScalar>> {
        if order > MAX_CHERN_ORDER {
            return Err(JetError::OrderOutOfRange(order).into());
        }
        let n = self.map.dim;
        let seed = self.direction.seed();
        let position = self.map.jet(t, s, order + 1)?;
        let reference = self.reference.jet(t, s, order)?;
        let field = self.field.jet(t, s, order + 1)?;
        for (got, what) in [(reference.len(), n), (field.len(), n)] {
            if got != what {
                return Err(GeometryError::DimensionMismatch {
                    expected: what,
                    got,
                });
            }
        }
        let sample = TangentSample::new(values(position.clone()), values(reference.clone()));
        let conn = ConnectionJets::compute(self.metric, &sample, order)?;
        let inner: Vec<JetScalar> = position
            .iter()
            .map(|c| c.truncate(order))
            .chain(reference.iter().cloned())
            .collect();
        let d_position: Vec<JetScalar> = position.iter().map(|c| c.derivative(seed)).collect();
        let mut out: Vec<JetScalar> = field.iter().map(|c| c.derivative(seed)).collect();
        for (k, slot) in out.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let gamma = conn.chern_jet(k, i, j).compose(&inner)?;
                    *slot = &*slot + &(&(&field[i] * &d_position[j]) * &gamma);
                }
            }
        }
        Ok(out)
    }
}
