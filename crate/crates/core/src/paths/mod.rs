//! Curves, two-parameter maps and their curvature operators.
//!
//! Covariant derivatives along a map `Λ(t, s)` use a reference field `ρ`:
//! `(D_τ W)^k = ∂W^k/∂τ + W^i (∂Λ^j/∂τ) Γ^k_ij(Λ, ρ)`. Fields along maps
//! are evaluated as jets in the two seeds `(t, s)`, so nested derivatives
//! are exact.

mod along;
mod geodesic;

pub use along::{
    covariant_derivative_along, AlongMap, CovariantDerivative, CurvePath, Direction,
    FieldAlongCurve, FieldAlongMap, MapPartial, TwoParameterMap,
};
pub use geodesic::{
    geodesic_acceleration, geodesic_integrate, geodesic_transport, IntegrationAborted, Trajectory,
    TrajectorySample,
};

use crate::connection::ConnectionJets;
use crate::curvature::{affine_curvature_at, chern_curvature_at, ChartVectorField};
use crate::error::{GeometryError, Result};
use crate::metrics::{MetricField, TangentSample};

/// Tolerance on `Ṽ(γ(t)) = γ̇(t)` for extensions.
pub const EXTENSION_TOLERANCE: f64 = 1e-10;
/// Tolerance on the first-order contact `∂Ṽ·γ̇ = γ̈`.
pub const EXTENSION_CONTACT_TOLERANCE: f64 = 1e-8;

/// `R^Λ(W) = D_t D_s W − D_s D_t W` with reference `Λ_t` throughout.
pub fn lambda_curvature(
    m: &MetricField,
    map: &TwoParameterMap,
    field: &dyn AlongMap,
    t: f64,
    s: f64,
) -> Result<Vec<f64>> {
    map.check_domain(t, s)?;
    let velocity = map.partial(Direction::T);
    let d_s = covariant_derivative_along(m, map, field, &velocity, Direction::S);
    let d_t = covariant_derivative_along(m, map, field, &velocity, Direction::T);
    let d_t_d_s = covariant_derivative_along(m, map, &d_s, &velocity, Direction::T);
    let d_s_d_t = covariant_derivative_along(m, map, &d_t, &velocity, Direction::S);
    let a = d_t_d_s.jet(t, s, 0)?;
    let b = d_s_d_t.jet(t, s, 0)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(p, q)| p.value() - q.value())
        .collect())
}

/// Right side of the two-parameter-map curvature formula at one point of
/// a curve:
/// `R_γ̇(γ̇,U)W + P_γ̇(U, W, D γ̇) − P_γ̇(γ̇, W, D U)`.
///
/// `conn` is evaluated at `(γ(t), γ̇(t))` with order >= 1; `acceleration`
/// is `γ̈(t)` and `du` is `dU/dt`.
pub fn r_gamma_with(
    conn: &ConnectionJets,
    acceleration: &[f64],
    u: &[f64],
    du: &[f64],
    w: &[f64],
) -> Result<Vec<f64>> {
    let v = &conn.sample().y;
    let twist_v = conn.chern_apply(v, v);
    let accel_cov: Vec<f64> = acceleration
        .iter()
        .zip(&twist_v)
        .map(|(a, b)| a + b)
        .collect();
    let twist_u = conn.chern_apply(u, v);
    let du_cov: Vec<f64> = du.iter().zip(&twist_u).map(|(a, b)| a + b).collect();
    let r = chern_curvature_at(conn, v, u, w)?;
    let p_acc = conn.chern_tensor_apply(u, w, &accel_cov);
    let p_du = conn.chern_tensor_apply(v, w, &du_cov);
    Ok((0..conn.dim()).map(|k| r[k] + p_acc[k] - p_du[k]).collect())
}

/// [`r_gamma_with`] from raw curve data.
pub fn r_gamma_at(
    m: &MetricField,
    position: &[f64],
    velocity: &[f64],
    acceleration: &[f64],
    u: &[f64],
    du: &[f64],
    w: &[f64],
) -> Result<Vec<f64>> {
    for vec in [acceleration, u, du, w] {
        m.check_dims(vec)?;
    }
    let conn = ConnectionJets::compute(
        m,
        &TangentSample::new(position.to_vec(), velocity.to_vec()),
        1,
    )?;
    r_gamma_with(&conn, acceleration, u, du, w)
}

/// `R^γ(γ̇,U)W` at `t`.
pub fn r_gamma(
    m: &MetricField,
    curve: &CurvePath,
    u: &FieldAlongCurve,
    w: &FieldAlongCurve,
    t: f64,
) -> Result<Vec<f64>> {
    let (x, v, a) = curve.kinematics(t)?;
    let (u0, du) = u.value_and_derivative(t)?;
    let w0 = w.value(t)?;
    r_gamma_at(m, &x, &v, &a, &u0, &du, &w0)
}

/// `R^γ(γ̇,U)γ̇ = R_γ̇(γ̇,U)γ̇ + P_γ̇(U, γ̇, D γ̇)`; only `U(t)` is read.
pub fn r_gamma_velocity(
    m: &MetricField,
    curve: &CurvePath,
    u: &FieldAlongCurve,
    t: f64,
) -> Result<Vec<f64>> {
    let (x, v, a) = curve.kinematics(t)?;
    let u0 = u.value(t)?;
    m.check_dims(&u0)?;
    let conn = ConnectionJets::compute(m, &TangentSample::new(x, v.clone()), 1)?;
    let twist = conn.chern_apply(&v, &v);
    let accel_cov: Vec<f64> = a.iter().zip(&twist).map(|(p, q)| p + q).collect();
    let r = chern_curvature_at(&conn, &v, &u0, &v)?;
    let p = conn.chern_tensor_apply(&u0, &v, &accel_cov);
    Ok(r.iter().zip(&p).map(|(a, b)| a + b).collect())
}

/// `R^γ(γ̇,U)W` through chart extensions:
/// `(R^V(V,Ũ)W̃ + P_V(V, W̃, [Ũ,V]))(γ(t))`.
///
/// `Ṽ` must agree with `γ̇` along `γ` to first order at `t`; `U` and `W`
/// are the restrictions of `Ũ` and `W̃`.
pub fn r_gamma_via_extension(
    m: &MetricField,
    curve: &CurvePath,
    v_ext: &ChartVectorField,
    u_ext: &ChartVectorField,
    w_ext: &ChartVectorField,
    t: f64,
) -> Result<Vec<f64>> {
    let (x, v, a) = curve.kinematics(t)?;
    m.check_dims(&x)?;
    if !m.contains(&x) {
        return Err(GeometryError::OutsideChart { x });
    }
    let n = m.dim();
    let vj = v_ext.jet_at(&x)?;
    let vv = vj.value();
    let norm = |s: &[f64]| s.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let mismatch = vv
        .iter()
        .zip(&v)
        .fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs()));
    if mismatch > EXTENSION_TOLERANCE * (1.0 + norm(&v)) {
        return Err(GeometryError::ExtensionMismatch { residual: mismatch });
    }
    let contact = (0..n)
        .map(|k| ((0..n).map(|p| vj.partial(k, p) * v[p]).sum::<f64>() - a[k]).abs())
        .fold(0.0f64, f64::max);
    if contact > EXTENSION_CONTACT_TOLERANCE * (1.0 + norm(&a)) {
        return Err(GeometryError::ExtensionMismatch { residual: contact });
    }
    let conn = ConnectionJets::compute(m, &TangentSample::new(x.clone(), vv.clone()), 1)?;
    let uj = u_ext.jet_at(&x)?;
    let uu = uj.value();
    let ww = w_ext.value(&x)?;
    let bracket: Vec<f64> = (0..n)
        .map(|k| {
            (0..n)
                .map(|p| uu[p] * vj.partial(k, p) - vv[p] * uj.partial(k, p))
                .sum()
        })
        .collect();
    let affine = affine_curvature_at(&conn, &vj, &vv, &uu, &ww)?;
    let p = conn.chern_tensor_apply(&vv, &ww, &bracket);
    Ok(affine.iter().zip(&p).map(|(a, b)| a + b).collect())
}

/// `[X, Y]^k = X^p ∂Y^k/∂u^p − Y^p ∂X^k/∂u^p` at `x`.
pub fn lie_bracket(
    x_field: &ChartVectorField,
    y_field: &ChartVectorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    let a = x_field.jet_at(x)?;
    let b = y_field.jet_at(x)?;
    let (av, bv) = (a.value(), b.value());
    let n = x.len();
    Ok((0..n)
        .map(|k| {
            (0..n)
                .map(|p| av[p] * b.partial(k, p) - bv[p] * a.partial(k, p))
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::make_metric;
    use crate::polynomial::Polynomial;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    fn test_curve() -> CurvePath {
        CurvePath::polynomial(
            (0.0, 1.0),
            0.0,
            vec![vec![0.1, 0.3, 0.1, -0.05], vec![-0.2, 0.2, -0.15, 0.02]],
        )
    }

    fn test_u() -> FieldAlongCurve {
        FieldAlongCurve::polynomial(0.0, vec![vec![0.4, -0.3, 0.2], vec![0.7, 0.1, -0.25]])
    }

    /// `W(t, s)` with `W(t, 0)` independent of the s-dependent part.
    fn test_w() -> FieldAlongMap {
        FieldAlongMap::new(2, |t, s| {
            vec![
                &(t * 0.5) + &(s * 1.3) - 0.2,
                &(&(t * t) * 0.3) + &(&(s * t) * 0.7) + 0.9,
            ]
        })
    }

    #[test]
    fn euclidean_lambda_curvature_vanishes() {
        let m = make_metric("euclidean", 2, &[]).unwrap();
        let map = TwoParameterMap::canonical_variation(&m, &test_curve(), &test_u(), 0.1).unwrap();
        let r = lambda_curvature(&m, &map, &test_w(), 0.4, 0.0).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-14), "{r:?}");
    }

    #[test]
    fn lambda_curvature_matches_curve_formula() {
        let m = make_metric("randers", 2, &[]).unwrap();
        let curve = test_curve();
        let u = test_u();
        let map = TwoParameterMap::canonical_variation(&m, &curve, &u, 0.1).unwrap();
        let w = test_w();
        let w_curve = FieldAlongCurve::new(2, {
            let w = w.clone();
            move |t| w.eval_jets(t, &t.constant_like(0.0))
        });
        for &t in &[0.1, 0.5, 0.9] {
            let lhs = lambda_curvature(&m, &map, &w, t, 0.0).unwrap();
            let rhs = r_gamma(&m, &curve, &u, &w_curve, t).unwrap();
            let scale = 1.0 + lhs.iter().chain(&rhs).fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(max_diff(&lhs, &rhs) / scale < 1e-9, "{lhs:?} vs {rhs:?}");
        }
    }

    #[test]
    fn lambda_curvature_is_linear() {
        let m = make_metric("randers", 2, &[]).unwrap();
        let map = TwoParameterMap::canonical_variation(&m, &test_curve(), &test_u(), 0.1).unwrap();
        let w1 = test_w();
        let w2 = FieldAlongMap::new(2, |t, s| vec![&(s * t) + 0.3, &(t * -0.4) + 0.1]);
        let combo = FieldAlongMap::new(2, {
            let (w1, w2) = (w1.clone(), w2.clone());
            move |t, s| {
                let a = w1.eval_jets(t, s);
                let b = w2.eval_jets(t, s);
                a.iter()
                    .zip(&b)
                    .map(|(p, q)| &(p * 2.0) - &(q * 0.5))
                    .collect()
            }
        });
        let r1 = lambda_curvature(&m, &map, &w1, 0.3, 0.02).unwrap();
        let r2 = lambda_curvature(&m, &map, &w2, 0.3, 0.02).unwrap();
        let rc = lambda_curvature(&m, &map, &combo, 0.3, 0.02).unwrap();
        let expect: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        assert!(max_diff(&rc, &expect) < 1e-9);
    }

    #[test]
    fn r_gamma_velocity_ignores_derivative_of_u() {
        let m = make_metric("randers", 2, &[]).unwrap();
        let curve = test_curve();
        let u1 = FieldAlongCurve::polynomial(0.5, vec![vec![0.4, 1.0], vec![0.7, -2.0]]);
        let u2 = FieldAlongCurve::polynomial(0.5, vec![vec![0.4, -3.0], vec![0.7, 0.5]]);
        let a = r_gamma_velocity(&m, &curve, &u1, 0.5).unwrap();
        let b = r_gamma_velocity(&m, &curve, &u2, 0.5).unwrap();
        assert!(max_diff(&a, &b) < 1e-12);
        let velocity = FieldAlongCurve::velocity_of(&curve);
        let full = r_gamma(&m, &curve, &u1, &velocity, 0.5).unwrap();
        assert!(max_diff(&a, &full) < 1e-9, "{a:?} vs {full:?}");
    }

    #[test]
    fn extension_formula_matches_curve_formula() {
        let m = make_metric("randers", 2, &[]).unwrap();
        let curve = test_curve();
        let t0 = 0.4;
        let (x0, v0, a0) = curve.kinematics(t0).unwrap();
        // Ṽ = v0 + B (x − x0) with B v0 = a0.
        let nv = v0[0] * v0[0] + v0[1] * v0[1];
        let b: Vec<Vec<f64>> = (0..2)
            .map(|k| (0..2).map(|p| a0[k] * v0[p] / nv).collect())
            .collect();
        let v_ext = ChartVectorField::polynomial_about(
            "v",
            x0.clone(),
            (0..2)
                .map(|k| {
                    Polynomial::from_coefficients(2, &[v0[k], b[k][0], b[k][1], 0.1, -0.2, 0.05])
                        .unwrap()
                })
                .collect(),
        );
        let u_ext = ChartVectorField::polynomial_about(
            "u",
            x0.clone(),
            vec![
                Polynomial::from_coefficients(2, &[0.3, 0.5, -0.1]).unwrap(),
                Polynomial::from_coefficients(2, &[-0.6, 0.2, 0.4]).unwrap(),
            ],
        );
        let w_ext = ChartVectorField::polynomial_about(
            "w",
            x0.clone(),
            vec![
                Polynomial::from_coefficients(2, &[0.8, -0.3, 0.6]).unwrap(),
                Polynomial::from_coefficients(2, &[0.2, 0.1, 0.1]).unwrap(),
            ],
        );
        let lhs = r_gamma_via_extension(&m, &curve, &v_ext, &u_ext, &w_ext, t0).unwrap();
        let u = FieldAlongCurve::restrict(&u_ext, &curve);
        let w = FieldAlongCurve::restrict(&w_ext, &curve);
        let rhs = r_gamma(&m, &curve, &u, &w, t0).unwrap();
        assert!(max_diff(&lhs, &rhs) < 1e-9, "{lhs:?} vs {rhs:?}");

        let bad = ChartVectorField::constant("bad", vec![1.0, 0.0]);
        assert!(matches!(
            r_gamma_via_extension(&m, &curve, &bad, &u_ext, &w_ext, t0),
            Err(GeometryError::ExtensionMismatch { .. })
        ));
    }

    #[test]
    fn covariant_derivative_leibniz() {
        let m = make_metric("randers", 2, &[]).unwrap();
        let map = TwoParameterMap::from_curve(&test_curve());
        let velocity = map.partial(Direction::T);
        let w = test_w();
        let fw = FieldAlongMap::new(2, {
            let w = w.clone();
            move |t, s| w.eval_jets(t, s).iter().map(|c| &(t * t) * c).collect()
        });
        let t = 0.6;
        let dw = covariant_derivative_along(&m, &map, &w, &velocity, Direction::T)
            .jet(t, 0.0, 0)
            .unwrap();
        let dfw = covariant_derivative_along(&m, &map, &fw, &velocity, Direction::T)
            .jet(t, 0.0, 0)
            .unwrap();
        let w0 = w.jet(t, 0.0, 0).unwrap();
        for k in 0..2 {
            let expect = 2.0 * t * w0[k].value() + t * t * dw[k].value();
            assert!((dfw[k].value() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn euclidean_geodesic_is_straight() {
        let m = make_metric("euclidean", 2, &[]).unwrap();
        let traj = geodesic_integrate(&m, &[0.0, 0.0], &[1.0, 0.0], 1.0, 10).unwrap();
        let last = traj.last().unwrap();
        assert!(max_diff(&last.x, &[1.0, 0.0]) < 1e-12);
        assert_eq!(traj.samples.len(), 11);
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,x1,x2,y1,y2,L\n"));
        assert_eq!(csv.lines().count(), 12);
    }

    #[test]
    fn sphere_equator_closes() {
        let m = make_metric("sphere2", 2, &[]).unwrap();
        let traj = geodesic_integrate(
            &m,
            &[1.0, 0.0],
            &[0.0, 1.0],
            2.0 * std::f64::consts::PI,
            2000,
        )
        .unwrap();
        let last = traj.last().unwrap();
        assert!(max_diff(&last.x, &[1.0, 0.0]) < 1e-5, "{:?}", last.x);
    }

    #[test]
    fn randers_energy_is_conserved() {
        let m = make_metric("randers", 2, &[]).unwrap();
        let traj = geodesic_integrate(&m, &[-0.3, 0.1], &[0.5, 0.3], 1.0, 1000).unwrap();
        assert!(traj.energy_drift() < 1e-8, "{}", traj.energy_drift());
    }

    #[test]
    fn rk4_is_fourth_order() {
        let m = make_metric("sphere2", 2, &[]).unwrap();
        let duration = 2.0;
        let err = |steps| {
            let traj = geodesic_integrate(&m, &[1.0, 0.0], &[0.0, 1.0], duration, steps).unwrap();
            let x = &traj.last().unwrap().x;
            max_diff(x, &[duration.cos(), duration.sin()])
        };
        let ratio = err(20) / err(40);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn chart_exit_keeps_partial_trajectory() {
        let m = make_metric("euclidean", 2, &[]).unwrap();
        let err = geodesic_integrate(&m, &[0.0, 0.0], &[1.0, 0.0], 30.0, 300).unwrap_err();
        assert!(matches!(err.cause, GeometryError::ChartExit { .. }));
        assert!(err.partial.samples.len() >= 100);
        assert!(err.partial.samples.iter().all(|s| m.contains(&s.x)));
    }

    #[test]
    fn transported_vector_keeps_riemannian_inner_product() {
        let m = make_metric("sphere2", 2, &[]).unwrap();
        let traj =
            geodesic_transport(&m, &[0.3, -0.2], &[0.4, 0.5], &[vec![1.0, 0.2]], 1.0, 400).unwrap();
        let g = |x: &[f64], a: &[f64], b: &[f64]| {
            let c = 4.0 / (1.0 + x[0] * x[0] + x[1] * x[1]).powi(2);
            c * (a[0] * b[0] + a[1] * b[1])
        };
        let first = &traj.samples[0];
        let last = traj.last().unwrap();
        let i0 = g(&first.x, &first.y, &first.transported[0]);
        let i1 = g(&last.x, &last.y, &last.transported[0]);
        assert!((i0 - i1).abs() < 1e-9);
    }
}
