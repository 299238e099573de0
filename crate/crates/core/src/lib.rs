//! Connection and curvature engine for pseudo-Finsler metrics.
//!
//! The crate computes, from a Lagrangian `L(x, y)` on a single chart, the
//! fundamental tensor, spray, nonlinear connection, Chern connection and
//! Chern tensor, the curvature of the affine connections `∇^V`, the Chern
//! curvature, curvature operators of two-parameter maps and curves, and the
//! flag-curvature predecessor. All derivatives come from truncated
//! multivariate jets ([`jets`]), so identities hold to rounding error.
//! [`verify`] evaluates both sides of each identity on seeded samples.

#![allow(clippy::needless_range_loop)]

pub mod connection;
pub mod curvature;
pub mod error;
pub mod jets;
pub mod metrics;
pub mod paths;
pub mod polynomial;
pub mod scalar;
pub mod verify;

pub use connection::{connection_bundle, ConnectionBundle, ConnectionJets};
pub use error::GeometryError;
pub use jets::{jet_seed, JetError, JetOp, JetScalar};
pub use metrics::{make_metric, MetricField, TangentSample};
pub use scalar::Scalar;
