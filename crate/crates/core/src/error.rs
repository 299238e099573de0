use thiserror::Error;

use crate::jets::JetError;

/// Failures of the geometric layers (metrics, connection, curvature, paths).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(
        "unknown metric '{0}' (expected euclidean, riemannian_poly, sphere2, randers or funk)"
    )]
    UnknownMetric(String),
    #[error("invalid metric parameters: {0}")]
    InvalidParams(String),
    #[error("expected vectors of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point {x:?} lies outside the chart")]
    OutsideChart { x: Vec<f64> },
    #[error("vector {y:?} at {x:?} is not admissible")]
    Inadmissible { x: Vec<f64>, y: Vec<f64> },
    #[error("fundamental tensor is degenerate (det = {det:e})")]
    Degenerate { det: f64 },
    #[error("degenerate flag: denominator {denominator:e} below threshold")]
    DegenerateFlag { denominator: f64 },
    #[error("extension does not match the curve velocity (residual {residual:e})")]
    ExtensionMismatch { residual: f64 },
    #[error("parameter ({t}, {s}) outside the map domain")]
    OutsideDomain { t: f64, s: f64 },
    #[error("geodesic left the chart at t = {t}")]
    ChartExit { t: f64 },
    #[error("geodesic self-check failed: ẋẋΓ and ẋN differ by {residual:e}")]
    SprayMismatch { residual: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Jet(#[from] JetError),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
