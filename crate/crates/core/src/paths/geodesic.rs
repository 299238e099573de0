//! Fixed-step RK4 for `ẍ^k + Γ^k_ij(x, ẋ) ẋ^i ẋ^j = 0`, with optional
//! parallel transport `U̇^k + Γ^k_ij(x, ẋ) U^i ẋ^j = 0` carried along.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::connection::ConnectionJets;
use crate::error::GeometryError;
use crate::metrics::{MetricField, TangentSample};

/// Relative tolerance of the runtime check `ẋ^i ẋ^j Γ^k_ij = ẋ^j N^k_j`.
pub const SPRAY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(rename = "L")]
    pub lagrangian: f64,
    /// Parallel-transported vectors, in the order they were supplied.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transported: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub dim: usize,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    /// Columns `t, x1..xn, y1..yn, L`.
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=self.dim).map(|i| format!("x{i}")));
        cols.extend((1..=self.dim).map(|i| format!("y{i}")));
        cols.push("L".to_string());
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for s in &self.samples {
            let row: Vec<String> = std::iter::once(s.t)
                .chain(s.x.iter().copied())
                .chain(s.y.iter().copied())
                .chain(std::iter::once(s.lagrangian))
                .map(|v| format!("{v:.16e}"))
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// `max |L(t) − L(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        self.samples
            .iter()
            .map(|s| (s.lagrangian - first.lagrangian).abs())
            .fold(0.0, f64::max)
    }
}

/// An integration that stopped early; `partial` holds every completed step.
#[derive(Debug, Clone, thiserror::Error)]
#[error("integration stopped: {cause}")]
pub struct IntegrationAborted {
    pub partial: Trajectory,
    pub cause: GeometryError,
}

/// `ẍ = −Γ(x, ẋ)(ẋ, ẋ)`, after the spray self-check.
pub fn geodesic_acceleration(
    m: &MetricField,
    x: &[f64],
    y: &[f64],
) -> Result<Vec<f64>, GeometryError> {
    let conn = ConnectionJets::compute(m, &TangentSample::new(x.to_vec(), y.to_vec()), 0)?;
    acceleration_from(&conn)
}

fn acceleration_from(conn: &ConnectionJets) -> Result<Vec<f64>, GeometryError> {
    let y = &conn.sample().y;
    let n = conn.dim();
    let gyy = conn.chern_apply(y, y);
    let ny: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| conn.nonlinear(k, j) * y[j]).sum())
        .collect();
    let scale = 1.0 + gyy.iter().chain(&ny).fold(0.0f64, |a, v| a.max(v.abs()));
    let residual = gyy
        .iter()
        .zip(&ny)
        .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    if residual > SPRAY_TOLERANCE * scale {
        return Err(GeometryError::SprayMismatch { residual });
    }
    Ok(gyy.into_iter().map(|v| -v).collect())
}

pub fn geodesic_integrate(
    m: &MetricField,
    x0: &[f64],
    v0: &[f64],
    duration: f64,
    steps: usize,
) -> Result<Trajectory, IntegrationAborted> {
    geodesic_transport(m, x0, v0, &[], duration, steps)
}

struct State {
    x: Vec<f64>,
    y: Vec<f64>,
    us: Vec<Vec<f64>>,
}

impl State {
    fn axpy(&self, h: f64, d: &State) -> State {
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p + h * q).collect();
        State {
            x: add(&self.x, &d.x),
            y: add(&self.y, &d.y),
            us: self.us.iter().zip(&d.us).map(|(a, b)| add(a, b)).collect(),
        }
    }
}

fn rhs(m: &MetricField, s: &State, t: f64) -> Result<State, GeometryError> {
    if !s.x.iter().chain(&s.y).all(|v| v.is_finite()) {
        return Err(GeometryError::NonFinite("geodesic state"));
    }
    if !m.contains(&s.x) {
        return Err(GeometryError::ChartExit { t });
    }
    let conn = ConnectionJets::compute(m, &TangentSample::new(s.x.clone(), s.y.clone()), 0)?;
    let accel = acceleration_from(&conn)?;
    let us =
        s.us.iter()
            .map(|u| conn.chern_apply(u, &s.y).into_iter().map(|v| -v).collect())
            .collect();
    Ok(State {
        x: s.y.clone(),
        y: accel,
        us,
    })
}

/// Integrates the geodesic from `(x0, v0)` over `[0, duration]` in `steps`
/// RK4 steps, parallel-transporting each vector of `transported`.
pub fn geodesic_transport(
    m: &MetricField,
    x0: &[f64],
    v0: &[f64],
    transported: &[Vec<f64>],
    duration: f64,
    steps: usize,
) -> Result<Trajectory, IntegrationAborted> {
    let n = m.dim();
    let mut traj = Trajectory {
        dim: n,
        samples: Vec::with_capacity(steps + 1),
    };
    let abort = |traj: &Trajectory, cause| IntegrationAborted {
        partial: traj.clone(),
        cause,
    };
    if steps == 0 || !duration.is_finite() {
        return Err(abort(
            &traj,
            GeometryError::InvalidParams(format!(
                "need steps >= 1 and finite T, got steps={steps}, T={duration}"
            )),
        ));
    }
    let checked = m
        .check_sample(&TangentSample::new(x0.to_vec(), v0.to_vec()))
        .and_then(|_| transported.iter().try_for_each(|u| m.check_dims(u)));
    if let Err(e) = checked {
        return Err(abort(&traj, e));
    }

    let h = duration / steps as f64;
    let mut state = State {
        x: x0.to_vec(),
        y: v0.to_vec(),
        us: transported.to_vec(),
    };
    let record = |traj: &mut Trajectory, s: &State, t: f64| {
        traj.samples.push(TrajectorySample {
            t,
            x: s.x.clone(),
            y: s.y.clone(),
            lagrangian: m.lagrangian(&s.x, &s.y),
            transported: s.us.clone(),
        });
    };
    record(&mut traj, &state, 0.0);
    for step in 0..steps {
        let t = step as f64 * h;
        let advanced = (|| {
            let k1 = rhs(m, &state, t)?;
            let k2 = rhs(m, &state.axpy(0.5 * h, &k1), t + 0.5 * h)?;
            let k3 = rhs(m, &state.axpy(0.5 * h, &k2), t + 0.5 * h)?;
            let k4 = rhs(m, &state.axpy(h, &k3), t + h)?;
            let next = state
                .axpy(h / 6.0, &k1)
                .axpy(h / 3.0, &k2)
                .axpy(h / 3.0, &k3)
                .axpy(h / 6.0, &k4);
            if !m.contains(&next.x) {
                return Err(GeometryError::ChartExit { t: t + h });
            }
            if !m.is_admissible(&next.x, &next.y) {
                return Err(GeometryError::Inadmissible {
                    x: next.x.clone(),
                    y: next.y.clone(),
                });
            }
            Ok(next)
        })();
        match advanced {
            Ok(next) => {
                state = next;
                record(&mut traj, &state, (step + 1) as f64 * h);
            }
            Err(e) => return Err(abort(&traj, e)),
        }
    }
    Ok(traj)
}
