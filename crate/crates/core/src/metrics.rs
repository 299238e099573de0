//! Pseudo-Finsler Lagrangians and the built-in metric zoo.
//!
//! Every Lagrangian `L` is the square of a Finsler norm, positively
//! homogeneous of degree two in the fiber coordinates. Evaluators are
//! generic over [`Scalar`], so the same code runs on plain numbers and on
//! jets.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::jets::monomials;
use crate::polynomial::{basis_len, Polynomial};
use crate::scalar::{dot, Scalar};

/// Largest supported manifold dimension (two seeds per coordinate must fit
/// into a jet).
pub const MAX_DIM: usize = crate::jets::MAX_VARS / 2;

/// Relative threshold below which `yᵀG(x)y` counts as null.
const NULL_CONE_EPS: f64 = 1e-12;

/// A point of the tangent bundle in induced chart coordinates: the base
/// point `x` and the fiber vector `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        TangentSample { x, y }
    }

    /// The sample with its fiber vector scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        TangentSample {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * lambda).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum MetricKind {
    Euclidean,
    /// `L = yᵀ G(x) y`; `entries` is the full row-major matrix.
    RiemannianPoly {
        entries: Vec<Polynomial>,
    },
    /// Round unit sphere in a stereographic chart.
    Sphere2,
    /// `L = (|y| + b(x)·y)²` with `b_i(x) = offset_i + Σ_j linear_ij x_j`.
    Randers {
        offset: Vec<f64>,
        linear: Vec<f64>,
    },
    /// Funk metric of the Euclidean unit ball.
    Funk,
}

/// A pseudo-Finsler structure on a single chart.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    name: &'static str,
    dim: usize,
    params: Vec<f64>,
    chart_box: Vec<(f64, f64)>,
    kind: MetricKind,
}

/// Names accepted by [`make_metric`].
pub const ZOO: [&str; 5] = ["euclidean", "riemannian_poly", "sphere2", "randers", "funk"];

/// Builds a zoo metric.
///
/// Parameter vectors:
/// - `euclidean`, `sphere2`, `funk`: none.
/// - `riemannian_poly`: the upper triangle of `G(x)` (row-major, `i <= j`),
///   each entry a coefficient list of the same graded basis length. Empty
///   selects a built-in positive-definite quadratic `G`.
/// - `randers`: `b` offset (length `n`), optionally followed by the `n × n`
///   row-major linear part `∂b_i/∂x^j`. Empty selects a built-in affine `b`.
pub fn make_metric(name: &str, dim: usize, params: &[f64]) -> Result<MetricField> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(GeometryError::InvalidParams(format!(
            "dimension {dim} outside 2..={MAX_DIM}"
        )));
    }
    if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
        return Err(GeometryError::InvalidParams(format!(
            "non-finite parameter {bad}"
        )));
    }
    let unit_box = vec![(-1.0, 1.0); dim];
    let no_params = |name: &str| -> Result<()> {
        if params.is_empty() {
            Ok(())
        } else {
            Err(GeometryError::InvalidParams(format!(
                "{name} takes no parameters"
            )))
        }
    };
    let fixed_dim = |name: &str| -> Result<()> {
        if dim == 2 {
            Ok(())
        } else {
            Err(GeometryError::InvalidParams(format!(
                "{name} is only defined for dim = 2"
            )))
        }
    };
    let metric = match name {
        "euclidean" => {
            no_params(name)?;
            MetricField {
                name: "euclidean",
                dim,
                params: Vec::new(),
                chart_box: vec![(-10.0, 10.0); dim],
                kind: MetricKind::Euclidean,
            }
        }
        "riemannian_poly" => {
            let params = if params.is_empty() {
                default_riemannian_params(dim)
            } else {
                params.to_vec()
            };
            let entries = riemannian_entries(dim, &params)?;
            MetricField {
                name: "riemannian_poly",
                dim,
                params,
                chart_box: unit_box,
                kind: MetricKind::RiemannianPoly { entries },
            }
        }
        "sphere2" => {
            no_params(name)?;
            fixed_dim(name)?;
            MetricField {
                name: "sphere2",
                dim,
                params: Vec::new(),
                chart_box: vec![(-2.0, 2.0); 2],
                kind: MetricKind::Sphere2,
            }
        }
        "randers" => {
            let params = if params.is_empty() {
                default_randers_params(dim)
            } else {
                params.to_vec()
            };
            let (offset, linear) = if params.len() == dim {
                (params.clone(), vec![0.0; dim * dim])
            } else if params.len() == dim + dim * dim {
                (params[..dim].to_vec(), params[dim..].to_vec())
            } else {
                return Err(GeometryError::InvalidParams(format!(
                    "randers expects {} or {} parameters, got {}",
                    dim,
                    dim + dim * dim,
                    params.len()
                )));
            };
            MetricField {
                name: "randers",
                dim,
                params,
                chart_box: unit_box,
                kind: MetricKind::Randers { offset, linear },
            }
        }
        "funk" => {
            no_params(name)?;
            fixed_dim(name)?;
            MetricField {
                name: "funk",
                dim,
                params: Vec::new(),
                chart_box: vec![(-0.7, 0.7); 2],
                kind: MetricKind::Funk,
            }
        }
        other => return Err(GeometryError::UnknownMetric(other.to_string())),
    };
    metric.validate()?;
    Ok(metric)
}

/// Builds `riemannian_poly` from a full symmetric matrix of coefficient
/// lists, the layout of the JSON coefficient file.
pub fn riemannian_from_matrix(matrix: &[Vec<Vec<f64>>]) -> Result<MetricField> {
    let dim = matrix.len();
    if matrix.iter().any(|row| row.len() != dim) {
        return Err(GeometryError::InvalidParams(
            "coefficient matrix must be square".into(),
        ));
    }
    let mut params = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            if matrix[i][j] != matrix[j][i] {
                return Err(GeometryError::InvalidParams(format!(
                    "coefficient matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let width = matrix.iter().flatten().map(|c| c.len()).max().unwrap_or(0);
    for i in 0..dim {
        for j in i..dim {
            let mut c = matrix[i][j].clone();
            c.resize(width, 0.0);
            params.extend(c);
        }
    }
    make_metric("riemannian_poly", dim, &params)
}

fn riemannian_entries(dim: usize, params: &[f64]) -> Result<Vec<Polynomial>> {
    let slots = dim * (dim + 1) / 2;
    if params.is_empty() || !params.len().is_multiple_of(slots) {
        return Err(GeometryError::InvalidParams(format!(
            "riemannian_poly expects a multiple of {slots} coefficients, got {}",
            params.len()
        )));
    }
    let width = params.len() / slots;
    if (0..=6).all(|d| basis_len(dim, d) != width) {
        return Err(GeometryError::InvalidParams(format!(
            "{width} coefficients per entry is not a full polynomial basis in {dim} variables"
        )));
    }
    let mut upper = params
        .chunks(width)
        .map(|c| Polynomial::from_coefficients(dim, c).expect("basis length checked above"));
    let mut entries = vec![Polynomial::constant(dim, 0.0); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let p = upper.next().expect("slot count checked above");
            entries[j * dim + i] = p.clone();
            entries[i * dim + j] = p;
        }
    }
    Ok(entries)
}

/// `G_ii = 1 + 0.2 x_i² + 0.1 x_{i+1}`, `G_{i,i+1} = 0.15 x_i x_{i+1}`.
fn default_riemannian_params(dim: usize) -> Vec<f64> {
    let basis = monomials(dim, 2);
    let coeffs = |terms: &[(f64, Vec<u8>)]| -> Vec<f64> {
        basis
            .iter()
            .map(|m| terms.iter().filter(|(_, t)| t == m).map(|(c, _)| *c).sum())
            .collect()
    };
    let unit = |i: usize, e: u8| {
        let mut m = vec![0u8; dim];
        m[i] += e;
        m
    };
    let mut params = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let next = (i + 1) % dim;
            let terms: Vec<(f64, Vec<u8>)> = if i == j {
                vec![(1.0, vec![0; dim]), (0.2, unit(i, 2)), (0.1, unit(next, 1))]
            } else if j == i + 1 {
                let mut m = unit(i, 1);
                m[j] += 1;
                vec![(0.15, m)]
            } else {
                Vec::new()
            };
            params.extend(coeffs(&terms));
        }
    }
    params
}

/// `b(x) = (0.3 + 0.2 x_1, 0.1 - 0.15 x_0, 0, ...)`.
fn default_randers_params(dim: usize) -> Vec<f64> {
    let mut offset = vec![0.0; dim];
    offset[0] = 0.3;
    offset[1] = 0.1;
    let mut linear = vec![0.0; dim * dim];
    linear[1] = 0.2;
    linear[dim] = -0.15;
    offset.extend(linear);
    offset
}

fn box_vertices(bx: &[(f64, f64)]) -> Vec<Vec<f64>> {
    (0..1usize << bx.len())
        .map(|mask| {
            bx.iter()
                .enumerate()
                .map(|(i, &(lo, hi))| if mask >> i & 1 == 1 { hi } else { lo })
                .collect()
        })
        .collect()
}

impl MetricField {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Per-coordinate intervals of the chart domain.
    pub fn chart_box(&self) -> &[(f64, f64)] {
        &self.chart_box
    }

    /// Replaces the chart domain, re-checking the metric's constraints.
    pub fn with_chart_box(mut self, chart_box: Vec<(f64, f64)>) -> Result<Self> {
        if chart_box.len() != self.dim
            || chart_box
                .iter()
                .any(|&(lo, hi)| lo.is_nan() || hi.is_nan() || lo >= hi)
        {
            return Err(GeometryError::InvalidParams(
                "chart box needs one nonempty interval per coordinate".into(),
            ));
        }
        self.chart_box = chart_box;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            // |b| is convex on the box for affine b, so vertices bound it.
            MetricKind::Randers { .. } => {
                for v in box_vertices(&self.chart_box) {
                    let norm = self.randers_b(&v).iter().map(|b| b * b).sum::<f64>();
                    if norm >= 1.0 {
                        return Err(GeometryError::InvalidParams(format!(
                            "randers requires |b| < 1 on the chart, |b({v:?})| = {}",
                            norm.sqrt()
                        )));
                    }
                }
            }
            MetricKind::Funk => {
                for v in box_vertices(&self.chart_box) {
                    if v.iter().map(|c| c * c).sum::<f64>() >= 1.0 {
                        return Err(GeometryError::InvalidParams(
                            "funk chart must lie inside the open unit ball".into(),
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn randers_b<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let MetricKind::Randers { offset, linear } = &self.kind else {
            unreachable!("randers_b on a non-Randers metric")
        };
        (0..self.dim)
            .map(|i| {
                let mut b = x[0].constant_like(offset[i]);
                for (j, xj) in x.iter().enumerate() {
                    let c = linear[i * self.dim + j];
                    if c != 0.0 {
                        b = b + xj.clone() * c;
                    }
                }
                b
            })
            .collect()
    }

    /// `G(x)` entries for `riemannian_poly`, row-major.
    pub fn riemannian_matrix(&self) -> Option<&[Polynomial]> {
        match &self.kind {
            MetricKind::RiemannianPoly { entries } => Some(entries),
            _ => None,
        }
    }

    /// The Lagrangian over any scalar algebra.
    pub fn lagrangian<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        match &self.kind {
            MetricKind::Euclidean => dot(y, y),
            MetricKind::RiemannianPoly { entries } => {
                let n = self.dim;
                let mut acc = y[0].constant_like(0.0);
                for i in 0..n {
                    for j in 0..n {
                        let gij = entries[i * n + j].eval(x);
                        acc = acc + gij * y[i].clone() * y[j].clone();
                    }
                }
                acc
            }
            MetricKind::Sphere2 => {
                let conformal = dot(x, x) + 1.0;
                dot(y, y) * 4.0 / (conformal.clone() * conformal)
            }
            MetricKind::Randers { .. } => {
                let alpha = dot(y, y).sqrt();
                let beta = dot(&self.randers_b(x), y);
                let f = alpha + beta;
                f.clone() * f
            }
            MetricKind::Funk => {
                let xx = dot(x, x);
                let xy = dot(x, y);
                let yy = dot(y, y);
                let gap = -xx + 1.0;
                let root = (gap.clone() * yy + xy.clone() * xy.clone()).sqrt();
                let f = (root + xy) / gap;
                f.clone() * f
            }
        }
    }

    /// Whether `x` lies in the chart domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter()
                .zip(&self.chart_box)
                .all(|(v, &(lo, hi))| *v >= lo && *v <= hi)
    }

    /// Membership of `(x, y)` in the conic admissible set `A`.
    pub fn is_admissible(&self, x: &[f64], y: &[f64]) -> bool {
        if x.len() != self.dim || y.len() != self.dim {
            return false;
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return false;
        }
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if yy == 0.0 {
            return false;
        }
        match &self.kind {
            MetricKind::Euclidean | MetricKind::Sphere2 => true,
            MetricKind::RiemannianPoly { .. } => self.lagrangian(x, y).abs() > NULL_CONE_EPS * yy,
            MetricKind::Randers { .. } => {
                self.randers_b(x).iter().map(|b| b * b).sum::<f64>() < 1.0
            }
            MetricKind::Funk => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
        }
    }

    pub(crate) fn check_dims(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            })
        }
    }

    /// Validates a reference vector: dimensions, chart membership and
    /// admissibility.
    pub fn check_sample(&self, v: &TangentSample) -> Result<()> {
        self.check_dims(&v.x)?;
        self.check_dims(&v.y)?;
        if !self.contains(&v.x) {
            return Err(GeometryError::OutsideChart { x: v.x.clone() });
        }
        if !self.is_admissible(&v.x, &v.y) {
            return Err(GeometryError::Inadmissible {
                x: v.x.clone(),
                y: v.y.clone(),
            });
        }
        Ok(())
    }

    /// `L(v)` at an admissible sample.
    pub fn evaluate(&self, v: &TangentSample) -> Result<f64> {
        self.check_sample(v)?;
        let l = self.lagrangian(&v.x, &v.y);
        if l.is_finite() {
            Ok(l)
        } else {
            Err(GeometryError::NonFinite("Lagrangian"))
        }
    }
}
