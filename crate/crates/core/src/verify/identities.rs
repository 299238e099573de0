use serde_json::json;

use super::sampling::Sampler;
use super::{delta_chern_curvature, IdentityId, Outcome, Result};
use crate::connection::ConnectionJets;
use crate::curvature::{
    affine_curvature_at, flag_denominator, flag_predecessor_at, nabla_along, ChartVectorField,
};
use crate::error::Result as GResult;
use crate::jets::JetScalar;
use crate::metrics::{MetricField, TangentSample};
use crate::paths::{
    geodesic_transport, lambda_curvature, lie_bracket, r_gamma, r_gamma_at, r_gamma_velocity,
    r_gamma_via_extension, r_gamma_with, CurvePath, Direction, FieldAlongCurve, FieldAlongMap,
    Trajectory, TwoParameterMap,
};
use crate::polynomial::{basis_len, Polynomial};

/// Geodesic sweeps: initial speed, duration, RK4 steps and sampled points.
const GEODESIC_SPEED: f64 = 0.4;
const GEODESIC_TIME: f64 = 1.0;
const GEODESIC_STEPS: usize = 200;
const GEODESIC_POINTS: usize = 20;

pub(super) fn pipelines(id: IdentityId) -> &'static str {
    match id {
        IdentityId::PPROP => "lhs: y-derivatives of the Chern jets contracted with y; rhs: 0",
        IdentityId::LEMMA_NULLP => {
            "lhs: y-derivatives of the Chern jets contracted twice with y; rhs: 0"
        }
        IdentityId::THM1_TWOPARAM => {
            "lhs: nested covariant derivatives on (t,s) jets of the map with Chern jets composed \
             through the map; rhs: Chern curvature and P at the velocity from the map's \
             Taylor coefficients"
        }
        IdentityId::COR_EXT_INDEP => {
            "lhs: nested covariant derivatives of the map velocity on (t,s) jets; rhs: Chern \
             curvature and P from the curve and the value U(t) alone"
        }
        IdentityId::THM2_RV => {
            "lhs: coordinate curvature of the Chern coefficients composed with the field jets; \
             rhs: delta-derivative Chern curvature plus P terms with the covariant derivative of V"
        }
        IdentityId::THM3_RGAMMA => {
            "lhs: extension formula with Lie bracket and field-composed curvature; rhs: curve \
             formula on the restricted fields"
        }
        IdentityId::FLAG_ANTISYM => {
            "lhs: g(R^γ(γ̇,U)W, γ̇); rhs: -g(R^γ(γ̇,U)γ̇, W); arbitrary U, dU/dt, W along RK4 geodesics"
        }
        IdentityId::PREDECESSOR => {
            "lhs: flag predecessor from the Chern curvature; rhs: R^γ quotient with parallel and \
             with arbitrary U along RK4 geodesics"
        }
        IdentityId::TORSION_FREE => {
            "lhs: covariant derivatives of chart fields and Γ, P entries; rhs: Lie bracket and \
             index-swapped entries"
        }
        IdentityId::GAMMA_CONTRACTS_TO_N => {
            "lhs: y contracted with Chern coefficients; rhs: half the y-derivative of the spray"
        }
        IdentityId::HOMOGENEITY_N => {
            "lhs: Euler derivative of N and N at a rescaled vector; rhs: N and rescaled N"
        }
    }
}

pub(super) fn evaluate(m: &MetricField, id: IdentityId, s: &mut Sampler) -> Result<Outcome> {
    let name = id.as_str();
    match id {
        IdentityId::PPROP => s.retry(name, |s| pprop(m, s)),
        IdentityId::LEMMA_NULLP => s.retry(name, |s| lemma_nullp(m, s)),
        IdentityId::THM1_TWOPARAM => s.retry(name, |s| thm1(m, s)),
        IdentityId::COR_EXT_INDEP => s.retry(name, |s| cor_ext_indep(m, s)),
        IdentityId::THM2_RV => s.retry(name, |s| thm2(m, s)),
        IdentityId::THM3_RGAMMA => s.retry(name, |s| thm3(m, s)),
        IdentityId::FLAG_ANTISYM => s.retry(name, |s| flag_antisym(m, s)),
        IdentityId::PREDECESSOR => s.retry(name, |s| predecessor(m, s)),
        IdentityId::TORSION_FREE => s.retry(name, |s| torsion_free(m, s)),
        IdentityId::GAMMA_CONTRACTS_TO_N => s.retry(name, |s| gamma_contracts(m, s)),
        IdentityId::HOMOGENEITY_N => s.retry(name, |s| homogeneity_n(m, s)),
    }
}

fn tangent(m: &MetricField, s: &mut Sampler) -> TangentSample {
    let x = s.point(m);
    let y = s.direction(m.dim());
    TangentSample::new(x, y)
}

fn pprop(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let v = tangent(m, s);
    let conn = ConnectionJets::compute(m, &v, 1)?;
    let n = m.dim();
    let (a, b) = (s.direction(n), s.direction(n));
    let lhs = conn.chern_tensor_apply(&a, &b, &v.y);
    Ok(Outcome::new(
        json!({ "x": v.x, "y": v.y, "X": a, "Y": b }),
        lhs,
        vec![0.0; n],
    ))
}

fn lemma_nullp(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let v = tangent(m, s);
    let conn = ConnectionJets::compute(m, &v, 1)?;
    let n = m.dim();
    let u = s.direction(n);
    let lhs = conn.chern_tensor_apply(&v.y, &v.y, &u);
    Ok(Outcome::new(
        json!({ "x": v.x, "y": v.y, "u": u }),
        lhs,
        vec![0.0; n],
    ))
}

fn gamma_contracts(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let v = tangent(m, s);
    let conn = ConnectionJets::compute(m, &v, 0)?;
    let n = m.dim();
    let lhs = (0..n * n)
        .map(|a| (0..n).map(|i| v.y[i] * conn.chern(a / n, i, a % n)).sum())
        .collect();
    let rhs = (0..n * n).map(|a| conn.nonlinear(a / n, a % n)).collect();
    Ok(Outcome::new(json!({ "x": v.x, "y": v.y }), lhs, rhs))
}

fn homogeneity_n(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let v = tangent(m, s);
    let conn = ConnectionJets::compute(m, &v, 1)?;
    let lambda = s.uniform(0.5, 2.0);
    let scaled = ConnectionJets::compute(m, &v.scaled(lambda), 0)?;
    let n = m.dim();
    let mut lhs: Vec<f64> = (0..n * n)
        .map(|a| {
            (0..n)
                .map(|l| v.y[l] * conn.nonlinear_dy(a / n, a % n, l))
                .sum()
        })
        .collect();
    lhs.extend((0..n * n).map(|a| scaled.nonlinear(a / n, a % n)));
    let mut rhs: Vec<f64> = (0..n * n).map(|a| conn.nonlinear(a / n, a % n)).collect();
    rhs.extend((0..n * n).map(|a| lambda * conn.nonlinear(a / n, a % n)));
    Ok(Outcome::new(
        json!({ "x": v.x, "y": v.y, "lambda": lambda }),
        lhs,
        rhs,
    ))
}

/// A random polynomial field about `center` of degree `degree`.
fn random_field(
    name: &str,
    s: &mut Sampler,
    center: &[f64],
    degree: usize,
    scale: f64,
) -> (ChartVectorField, Vec<Vec<f64>>) {
    let n = center.len();
    let coeffs: Vec<Vec<f64>> = (0..n)
        .map(|_| s.vector(basis_len(n, degree), scale))
        .collect();
    (polynomial_field(name, center, &coeffs), coeffs)
}

fn polynomial_field(name: &str, center: &[f64], coeffs: &[Vec<f64>]) -> ChartVectorField {
    let n = center.len();
    let components = coeffs
        .iter()
        .map(|c| Polynomial::from_coefficients(n, c).expect("full basis"))
        .collect();
    ChartVectorField::polynomial_about(name, center.to_vec(), components)
}

fn torsion_free(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let v = tangent(m, s);
    let conn = ConnectionJets::compute(m, &v, 1)?;
    let n = m.dim();
    let (xf, xc) = random_field("X", s, &v.x, 2, 1.0);
    let (yf, yc) = random_field("Y", s, &v.x, 2, 1.0);
    let (xj, yj) = (xf.jet_at(&v.x)?, yf.jet_at(&v.x)?);
    let nxy = nabla_along(&conn, &yj, &xj.value());
    let nyx = nabla_along(&conn, &xj, &yj.value());
    let mut lhs: Vec<f64> = nxy.iter().zip(&nyx).map(|(a, b)| a - b).collect();
    let mut rhs = lie_bracket(&xf, &yf, &v.x)?;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                lhs.push(conn.chern(k, i, j));
                rhs.push(conn.chern(k, j, i));
                for l in 0..n {
                    lhs.push(conn.chern_tensor(k, i, j, l));
                    rhs.push(conn.chern_tensor(k, j, i, l));
                }
            }
        }
    }
    Ok(Outcome::new(
        json!({ "x": v.x, "y": v.y, "X": xc, "Y": yc }),
        lhs,
        rhs,
    ))
}

/// Monomials `t^a s^b` of a two-parameter map, graded up to degree 3.
const MAP_MONOMIALS: [(i32, i32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

fn eval_ts(coeffs: &[f64], t: &JetScalar, s: &JetScalar) -> JetScalar {
    let mut acc = t.constant_like(0.0);
    for (&c, &(a, b)) in coeffs.iter().zip(&MAP_MONOMIALS) {
        if c == 0.0 {
            continue;
        }
        let mut term = t.constant_like(c);
        if a > 0 {
            term = &term * &t.powi(a);
        }
        if b > 0 {
            term = &term * &s.powi(b);
        }
        acc = &acc + &term;
    }
    acc
}

/// `Λ^k(t,s) = Σ c^k_ab t^a s^b` with `Λ(0,0) = x0`, `Λ_t = v`, `Λ_s = u`.
struct RandomMap {
    map: TwoParameterMap,
    coeffs: Vec<Vec<f64>>,
}

impl RandomMap {
    fn draw(m: &MetricField, s: &mut Sampler) -> RandomMap {
        let n = m.dim();
        let x0 = s.point(m);
        let v = s.direction(n);
        let u = s.direction(n);
        let coeffs: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let mut c = vec![x0[k], v[k], u[k]];
                c.extend(s.vector(MAP_MONOMIALS.len() - 3, 0.3));
                c
            })
            .collect();
        let table = coeffs.clone();
        let map = TwoParameterMap::new(n, (-0.5, 0.5), 0.25, move |t, s| {
            table.iter().map(|c| eval_ts(c, t, s)).collect()
        });
        RandomMap { map, coeffs }
    }

    /// Coefficient of `t^a s^b` in every component.
    fn coefficient(&self, a: i32, b: i32) -> Vec<f64> {
        let idx = MAP_MONOMIALS.iter().position(|&e| e == (a, b)).unwrap();
        self.coeffs.iter().map(|c| c[idx]).collect()
    }
}

fn thm1(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let n = m.dim();
    let lam = RandomMap::draw(m, s);
    let wc: Vec<Vec<f64>> = (0..n).map(|_| s.vector(6, 1.0)).collect();
    let table = wc.clone();
    let w = FieldAlongMap::new(n, move |t, s| {
        table
            .iter()
            .map(|c| {
                let mut full = c.clone();
                full.resize(MAP_MONOMIALS.len(), 0.0);
                eval_ts(&full, t, s)
            })
            .collect()
    });
    let lhs = lambda_curvature(m, &lam.map, &w, 0.0, 0.0)?;
    let acc: Vec<f64> = lam.coefficient(2, 0).iter().map(|c| 2.0 * c).collect();
    let w0: Vec<f64> = wc.iter().map(|c| c[0]).collect();
    let rhs = r_gamma_at(
        m,
        &lam.coefficient(0, 0),
        &lam.coefficient(1, 0),
        &acc,
        &lam.coefficient(0, 1),
        &lam.coefficient(1, 1),
        &w0,
    )?;
    Ok(Outcome::new(
        json!({ "map": lam.coeffs, "W": wc }),
        lhs,
        rhs,
    ))
}

fn cor_ext_indep(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let lam = RandomMap::draw(m, s);
    let velocity = lam.map.partial(Direction::T);
    let lhs = lambda_curvature(m, &lam.map, &velocity, 0.0, 0.0)?;
    let curve_coeffs: Vec<Vec<f64>> = (0..m.dim())
        .map(|k| {
            [(0, 0), (1, 0), (2, 0), (3, 0)]
                .iter()
                .map(|&(a, b)| lam.coefficient(a, b)[k])
                .collect()
        })
        .collect();
    let curve = CurvePath::polynomial((-0.5, 0.5), 0.0, curve_coeffs);
    // U frozen at its value: the map's dU/dt is discarded on this side.
    let u = FieldAlongCurve::polynomial(
        0.0,
        lam.coefficient(0, 1).iter().map(|&c| vec![c]).collect(),
    );
    let rhs = r_gamma_velocity(m, &curve, &u, 0.0)?;
    Ok(Outcome::new(json!({ "map": lam.coeffs }), lhs, rhs))
}

fn thm2(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let v = tangent(m, s);
    let n = m.dim();
    let mut vc: Vec<Vec<f64>> = (0..n).map(|_| s.vector(basis_len(n, 2), 0.5)).collect();
    for (k, c) in vc.iter_mut().enumerate() {
        c[0] = v.y[k];
    }
    let field = polynomial_field("V", &v.x, &vc);
    let (xd, yd, zd) = (s.direction(n), s.direction(n), s.direction(n));
    let conn = ConnectionJets::compute(m, &v, 1)?;
    let vj = field.jet_at(&v.x)?;
    let lhs = affine_curvature_at(&conn, &vj, &xd, &yd, &zd)?;

    let r = delta_chern_curvature(
        n,
        &|k, i, j| conn.chern(k, i, j),
        &|k, i, j, p| conn.chern_dx(k, i, j, p),
        &|k, i, j, l| conn.chern_tensor(k, i, j, l),
        &|l, p| conn.nonlinear(l, p),
        &xd,
        &yd,
        &zd,
    );
    let nx = nabla_along(&conn, &vj, &xd);
    let ny = nabla_along(&conn, &vj, &yd);
    let p1 = conn.chern_tensor_apply(&yd, &zd, &nx);
    let p2 = conn.chern_tensor_apply(&xd, &zd, &ny);
    let rhs = (0..n).map(|k| r[k] + p1[k] - p2[k]).collect();
    Ok(Outcome::new(
        json!({ "x": v.x, "V": vc, "X": xd, "Y": yd, "Z": zd }),
        lhs,
        rhs,
    ))
}

fn thm3(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let n = m.dim();
    let x0 = s.point(m);
    let v = s.direction(n);
    let a = s.vector(n, 0.5);
    let c3 = s.vector(n, 0.3);
    let curve = CurvePath::polynomial(
        (-0.5, 0.5),
        0.0,
        (0..n)
            .map(|k| vec![x0[k], v[k], 0.5 * a[k], c3[k]])
            .collect(),
    );
    // Ṽ = v + (a cᵀ + A)(x − x0) + quadratic, with c = v/|v|² and A v = 0,
    // so that Ṽ(γ(0)) = γ̇(0) and ∂Ṽ·γ̇ = γ̈ there.
    let vv: f64 = v.iter().map(|c| c * c).sum();
    let r = s.vector(n * n, 0.5);
    let quad = basis_len(n, 2) - 1 - n;
    let vc: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut c = vec![v[k]];
            for p in 0..n {
                let proj: f64 = (0..n)
                    .map(|q| r[k * n + q] * ((p == q) as u8 as f64 - v[q] * v[p] / vv))
                    .sum();
                c.push(a[k] * v[p] / vv + proj);
            }
            c.extend(s.vector(quad, 0.3));
            c
        })
        .collect();
    let v_ext = polynomial_field("V", &x0, &vc);
    let (u_ext, uc) = random_field("U", s, &x0, 2, 1.0);
    let (w_ext, wc) = random_field("W", s, &x0, 2, 1.0);
    let lhs = r_gamma_via_extension(m, &curve, &v_ext, &u_ext, &w_ext, 0.0)?;
    let u = FieldAlongCurve::restrict(&u_ext, &curve);
    let w = FieldAlongCurve::restrict(&w_ext, &curve);
    let rhs = r_gamma(m, &curve, &u, &w, 0.0)?;
    let bracket = lie_bracket(&u_ext, &v_ext, &x0)?;
    let mut out = Outcome::new(
        json!({ "x0": x0, "v": v, "a": a, "V": vc, "U": uc, "W": wc }),
        lhs,
        rhs,
    );
    let nonzero = bracket.iter().any(|b| b.abs() > 1e-6);
    out.diagnostics
        .insert("nonzero_brackets".into(), nonzero as u8 as f64);
    Ok(out)
}

fn random_geodesic(
    m: &MetricField,
    s: &mut Sampler,
    transported: &[Vec<f64>],
) -> GResult<(Vec<f64>, Vec<f64>, Trajectory)> {
    let x0 = s.point(m);
    let v0: Vec<f64> = s
        .direction(m.dim())
        .iter()
        .map(|c| c * GEODESIC_SPEED)
        .collect();
    let traj = geodesic_transport(m, &x0, &v0, transported, GEODESIC_TIME, GEODESIC_STEPS)
        .map_err(|e| e.cause)?;
    Ok((x0, v0, traj))
}

fn sampled_points(traj: &Trajectory) -> impl Iterator<Item = &crate::paths::TrajectorySample> {
    let stride = GEODESIC_STEPS / GEODESIC_POINTS;
    (0..GEODESIC_POINTS).map(move |i| &traj.samples[i * stride])
}

/// A direction not parallel to `y`.
fn transverse(s: &mut Sampler, y: &[f64]) -> Vec<f64> {
    let yy: f64 = y.iter().map(|c| c * c).sum();
    loop {
        let u = s.direction(y.len());
        let uy: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
        if 1.0 - uy * uy / yy > 1e-2 {
            return u;
        }
    }
}

fn flag_antisym(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let n = m.dim();
    let (x0, v0, traj) = random_geodesic(m, s, &[])?;
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for p in sampled_points(&traj) {
        let conn = ConnectionJets::compute(m, &TangentSample::new(p.x.clone(), p.y.clone()), 1)?;
        let acc: Vec<f64> = conn.chern_apply(&p.y, &p.y).iter().map(|c| -c).collect();
        let u = transverse(s, &p.y);
        let du = s.vector(n, 1.0);
        let w = s.vector(n, 1.0);
        let r_w = r_gamma_with(&conn, &acc, &u, &du, &w)?;
        let r_v = r_gamma_with(&conn, &acc, &u, &du, &p.y)?;
        lhs.push(conn.inner(&r_w, &p.y));
        rhs.push(-conn.inner(&r_v, &w));
    }
    Ok(Outcome::new(json!({ "x0": x0, "v0": v0 }), lhs, rhs))
}

fn predecessor(m: &MetricField, s: &mut Sampler) -> GResult<Outcome> {
    let n = m.dim();
    let (u0, w0) = (s.direction(n), s.direction(n));
    let (x0, v0, traj) = random_geodesic(m, s, &[u0.clone(), w0.clone()])?;
    let start = ConnectionJets::compute(m, &TangentSample::new(x0.clone(), v0.clone()), 0)?;
    flag_denominator(&start, &u0, &w0)?;
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for p in sampled_points(&traj) {
        let conn = ConnectionJets::compute(m, &TangentSample::new(p.x.clone(), p.y.clone()), 1)?;
        let acc: Vec<f64> = conn.chern_apply(&p.y, &p.y).iter().map(|c| -c).collect();
        let (u, w) = (&p.transported[0], &p.transported[1]);
        let flag = flag_predecessor_at(&conn, u, w)?;
        let parallel: Vec<f64> = conn.chern_apply(u, &p.y).iter().map(|c| -c).collect();
        let arbitrary = s.vector(n, 1.0);
        for du in [&parallel, &arbitrary] {
            let r = r_gamma_with(&conn, &acc, u, du, w)?;
            lhs.push(flag.k);
            rhs.push(conn.inner(&r, &p.y) / flag.denominator);
        }
    }
    Ok(Outcome::new(
        json!({ "x0": x0, "v0": v0, "u0": u0, "w0": w0 }),
        lhs,
        rhs,
    ))
}
