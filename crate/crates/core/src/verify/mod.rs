//! Seeded residual sweeps over the connection and curvature identities.
//!
//! Every identity is evaluated from two code paths that share no
//! intermediate tensors; the report records the relative residual
//! `‖lhs − rhs‖∞ / (1 + ‖lhs‖∞ + ‖rhs‖∞)` per sample.

mod fd;
mod identities;
mod sampling;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::metrics::{make_metric, MetricField};

pub use fd::{delta_chern_curvature, fd_cross_check, fd_flag_predecessor, FdQuantity};
pub use sampling::{Sampler, MAX_REJECTIONS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown identity '{0}'")]
    UnknownIdentity(String),
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error("sampler found no admissible input for {id} after {attempts} attempts")]
    SamplerExhausted { id: String, attempts: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T, E = VerifyError> = std::result::Result<T, E>;

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IdentityId {
    /// `P_V(X, Y, V) = 0`.
    PPROP,
    /// `P_v(v, v, u) = 0`.
    LEMMA_NULLP,
    /// `R^Λ(W)` against the curve formula with Chern curvature and `P`.
    THM1_TWOPARAM,
    /// `R^γ(γ̇,U)γ̇` reads only `U(t)`.
    COR_EXT_INDEP,
    /// `R^V` against `R_V` plus the two `P` corrections.
    THM2_RV,
    /// `R^γ` through chart extensions against the curve formula.
    THM3_RGAMMA,
    /// `g(R^γ(γ̇,U)W, γ̇) = −g(R^γ(γ̇,U)γ̇, W)` along geodesics.
    FLAG_ANTISYM,
    /// `K_v(u, w)` from `R_v` against the `R^γ` quotient along geodesics.
    PREDECESSOR,
    /// `∇^V_X Y − ∇^V_Y X = [X, Y]`.
    TORSION_FREE,
    /// `y^i Γ^k_ij = N^k_j`.
    GAMMA_CONTRACTS_TO_N,
    /// `y^l ∂N^k_j/∂y^l = N^k_j`.
    HOMOGENEITY_N,
}

impl IdentityId {
    pub const ALL: [IdentityId; 11] = [
        IdentityId::PPROP,
        IdentityId::LEMMA_NULLP,
        IdentityId::THM1_TWOPARAM,
        IdentityId::COR_EXT_INDEP,
        IdentityId::THM2_RV,
        IdentityId::THM3_RGAMMA,
        IdentityId::FLAG_ANTISYM,
        IdentityId::PREDECESSOR,
        IdentityId::TORSION_FREE,
        IdentityId::GAMMA_CONTRACTS_TO_N,
        IdentityId::HOMOGENEITY_N,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::PPROP => "PPROP",
            IdentityId::LEMMA_NULLP => "LEMMA_NULLP",
            IdentityId::THM1_TWOPARAM => "THM1_TWOPARAM",
            IdentityId::COR_EXT_INDEP => "COR_EXT_INDEP",
            IdentityId::THM2_RV => "THM2_RV",
            IdentityId::THM3_RGAMMA => "THM3_RGAMMA",
            IdentityId::FLAG_ANTISYM => "FLAG_ANTISYM",
            IdentityId::PREDECESSOR => "PREDECESSOR",
            IdentityId::TORSION_FREE => "TORSION_FREE",
            IdentityId::GAMMA_CONTRACTS_TO_N => "GAMMA_CONTRACTS_TO_N",
            IdentityId::HOMOGENEITY_N => "HOMOGENEITY_N",
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            IdentityId::COR_EXT_INDEP | IdentityId::THM2_RV | IdentityId::THM3_RGAMMA => 50,
            IdentityId::FLAG_ANTISYM | IdentityId::PREDECESSOR => 10,
            _ => 100,
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            IdentityId::THM1_TWOPARAM
            | IdentityId::COR_EXT_INDEP
            | IdentityId::THM2_RV
            | IdentityId::THM3_RGAMMA => 1e-7,
            IdentityId::FLAG_ANTISYM | IdentityId::PREDECESSOR => 1e-6,
            _ => 1e-9,
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| VerifyError::UnknownIdentity(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub metric: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
}

impl IdentityCase {
    /// A case with the default sample count and tolerance of `id`.
    pub fn new(id: IdentityId, metric: impl Into<String>, seed: u64) -> Self {
        IdentityCase {
            id,
            metric: metric.into(),
            seed,
            samples: id.default_samples(),
            tolerance: id.default_tolerance(),
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(VerifyError::InvalidCase(
                "samples must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(VerifyError::InvalidCase(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Inputs and both sides of a sample that exceeded the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureDump {
    pub sample: usize,
    pub residual: f64,
    pub inputs: serde_json::Value,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub id: String,
    pub metric: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: bool,
    pub failures: Vec<FailureDump>,
    /// Per-sample maximum relative residual, ordered by sample index.
    pub residuals: Vec<f64>,
    /// The code paths producing each side.
    pub pipelines: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
}

/// `‖a − b‖∞ / (1 + ‖a‖∞ + ‖b‖∞)`.
pub fn relative_residual(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs()));
    let finite = a.len() == b.len() && a.iter().chain(b).all(|v| v.is_finite());
    let diff = if finite { diff } else { f64::INFINITY };
    let r = diff / (1.0 + norm(a) + norm(b));
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// Both sides of one sample.
#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub inputs: serde_json::Value,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn new(inputs: serde_json::Value, lhs: Vec<f64>, rhs: Vec<f64>) -> Self {
        Outcome {
            inputs,
            lhs,
            rhs,
            diagnostics: BTreeMap::new(),
        }
    }
}

/// Metric used when a case names only the zoo entry.
pub fn default_metric(name: &str) -> Result<MetricField> {
    Ok(make_metric(name, 2, &[])?)
}

pub fn run_identity(case: &IdentityCase) -> Result<ResidualReport> {
    let m = default_metric(&case.metric)?;
    run_identity_with(&m, case)
}

/// Runs `case` on an explicitly configured metric; `case.metric` is
/// replaced by the metric's name in the report.
pub fn run_identity_with(m: &MetricField, case: &IdentityCase) -> Result<ResidualReport> {
    case.validate()?;
    let seeds = Sampler::sample_seeds(case.seed, case.samples);
    let outcomes: Vec<Outcome> = seeds
        .par_iter()
        .map(|&s| identities::evaluate(m, case.id, &mut Sampler::new(s)))
        .collect::<Result<_>>()?;
    Ok(assemble(
        case.id.as_str().to_string(),
        m.name().to_string(),
        case.seed,
        case.tolerance,
        identities::pipelines(case.id),
        outcomes,
    ))
}

pub(crate) fn assemble(
    id: String,
    metric: String,
    seed: u64,
    tolerance: f64,
    pipelines: &str,
    outcomes: Vec<Outcome>,
) -> ResidualReport {
    let mut residuals = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    let mut diagnostics: BTreeMap<String, f64> = BTreeMap::new();
    for (sample, o) in outcomes.into_iter().enumerate() {
        let r = relative_residual(&o.lhs, &o.rhs);
        residuals.push(r);
        for (k, v) in o.diagnostics {
            *diagnostics.entry(k).or_insert(0.0) += v;
        }
        if r.is_nan() || r > tolerance {
            failures.push(FailureDump {
                sample,
                residual: r,
                inputs: o.inputs,
                lhs: o.lhs,
                rhs: o.rhs,
            });
        }
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    ResidualReport {
        id,
        metric,
        seed,
        samples: residuals.len(),
        tolerance,
        max_residual,
        pass: failures.is_empty(),
        failures,
        residuals,
        pipelines: pipelines.to_string(),
        diagnostics,
    }
}

/// Every identity with default samples and tolerances.
pub fn run_suite(metric: &str, seed: u64) -> Result<Vec<ResidualReport>> {
    let m = default_metric(metric)?;
    run_suite_with(&m, seed)
}

pub fn run_suite_with(m: &MetricField, seed: u64) -> Result<Vec<ResidualReport>> {
    IdentityId::ALL
        .iter()
        .map(|&id| run_identity_with(m, &IdentityCase::new(id, m.name(), seed)))
        .collect()
}
