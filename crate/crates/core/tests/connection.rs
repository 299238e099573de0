//! Connection objects against closed forms and the Levi-Civita oracle.

#![allow(clippy::needless_range_loop)]

mod common;

use common::{max_abs, max_diff, LeviCivita};
use finsler::connection::ConnectionJets;
use finsler::metrics::riemannian_from_matrix;
use finsler::{connection_bundle, make_metric, MetricField, TangentSample};
use proptest::prelude::*;

fn randers() -> MetricField {
    make_metric("randers", 2, &[0.2, -0.1, 0.1, 0.05, -0.08, 0.12]).unwrap()
}

fn riemannian_metrics() -> Vec<MetricField> {
    vec![
        make_metric("riemannian_poly", 2, &[]).unwrap(),
        make_metric("riemannian_poly", 3, &[]).unwrap(),
        riemannian_from_matrix(&common::quadratic_metric_2d(
            [2.0, 0.3, -0.2, 0.25, 0.1, 0.15],
            [0.1, -0.05, 0.2, 0.0, 0.1, -0.1],
            [1.5, 0.0, 0.4, 0.2, -0.1, 0.3],
        ))
        .unwrap(),
    ]
}

fn flat(v: &[Vec<Vec<f64>>]) -> Vec<f64> {
    v.iter().flatten().flatten().copied().collect()
}

fn unit(angle: f64) -> Vec<f64> {
    vec![angle.cos(), angle.sin()]
}

#[test]
fn randers_fundamental_tensor_closed_form() {
    // g_ij = (F/α)(δ_ij − ŷ_i ŷ_j) + (ŷ_i + b_i)(ŷ_j + b_j), ŷ = y/α
    let m = randers();
    let x = [0.3, -0.4];
    let b = [
        0.2 + 0.1 * x[0] + 0.05 * x[1],
        -0.1 - 0.08 * x[0] + 0.12 * x[1],
    ];
    for angle in [0.0, 1.0, 2.5, 4.0] {
        let y: Vec<f64> = unit(angle).iter().map(|c| 1.7 * c).collect();
        let alpha = y.iter().map(|c| c * c).sum::<f64>().sqrt();
        let beta = b[0] * y[0] + b[1] * y[1];
        let f = alpha + beta;
        let yh = [y[0] / alpha, y[1] / alpha];
        let bundle = connection_bundle(&m, &TangentSample::new(x.to_vec(), y.clone())).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                let want = f / alpha * (delta - yh[i] * yh[j]) + (yh[i] + b[i]) * (yh[j] + b[j]);
                assert!((bundle.g[i][j] - want).abs() < 1e-12);
            }
        }
        assert!((bundle.lagrangian - f * f).abs() < 1e-12);
    }
}

#[test]
fn funk_spray_is_projective() {
    // Funk geodesics are straight lines with x'' = −F x'.
    let m = make_metric("funk", 2, &[]).unwrap();
    for (x, y) in [
        ([0.1, 0.2], [1.0, 0.0]),
        ([-0.5, 0.3], [0.3, -0.8]),
        ([0.6, -0.6], [-1.0, -1.0]),
    ] {
        let v = TangentSample::new(x.to_vec(), y.to_vec());
        let f = m.evaluate(&v).unwrap().sqrt();
        let bundle = connection_bundle(&m, &v).unwrap();
        for i in 0..2 {
            assert!(
                (bundle.spray[i] - f * y[i]).abs() < 1e-10,
                "{:?}",
                bundle.spray
            );
        }
    }
}

#[test]
fn sphere_metric_is_conformal() {
    let m = make_metric("sphere2", 2, &[]).unwrap();
    let x: [f64; 2] = [0.4, -1.1];
    let lambda = 4.0 / (1.0 + x[0] * x[0] + x[1] * x[1]).powi(2);
    let g = connection_bundle(&m, &TangentSample::new(x.to_vec(), vec![0.2, 0.9]))
        .unwrap()
        .g;
    assert!(
        max_diff(
            &[g[0][0], g[0][1], g[1][0], g[1][1]],
            &[lambda, 0.0, 0.0, lambda]
        ) < 1e-12
    );
}

#[test]
fn riemannian_degeneration() {
    for m in riemannian_metrics() {
        let n = m.dim();
        let points: Vec<Vec<f64>> = vec![
            vec![0.0; n],
            vec![0.3; n],
            (0..n).map(|i| 0.5 - 0.4 * i as f64).collect(),
        ];
        for x in points {
            let lc = LeviCivita::at(&m, &x);
            let y: Vec<f64> = (0..n).map(|i| 1.0 - 0.6 * i as f64).collect();
            let bundle = connection_bundle(&m, &TangentSample::new(x.clone(), y.clone())).unwrap();
            assert!(
                max_abs(&flat(
                    &bundle
                        .chern_tensor
                        .iter()
                        .flatten()
                        .cloned()
                        .collect::<Vec<_>>()
                )) < 1e-9
            );
            assert!(max_diff(&flat(&bundle.chern), &flat(&lc.gamma)) < 1e-10);
            assert!(max_diff(&flat(&bundle.gamma), &flat(&lc.gamma)) < 1e-10);
            for i in 0..n {
                let contracted: f64 = (0..n).map(|k| lc.gamma[i][0][k] * y[k]).sum();
                assert!((bundle.nonlinear[i][0] - contracted).abs() < 1e-10);
            }
            assert!(max_diff(&bundle.spray, &lc.apply(&y, &y)) < 1e-10);
        }
    }
}

#[test]
fn euclidean_connection_vanishes() {
    let m = make_metric("euclidean", 3, &[]).unwrap();
    let b = connection_bundle(
        &m,
        &TangentSample::new(vec![1.0, -2.0, 0.5], vec![0.3, 0.4, -1.0]),
    )
    .unwrap();
    assert!(max_abs(&flat(&b.chern)) == 0.0);
    assert!(max_abs(&b.spray) == 0.0);
    assert_eq!(
        b.g,
        vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0]
        ]
    );
}

#[test]
fn inadmissible_samples_are_rejected() {
    let m = randers();
    assert!(connection_bundle(&m, &TangentSample::new(vec![2.0, 0.0], vec![1.0, 0.0])).is_err());
    assert!(connection_bundle(&m, &TangentSample::new(vec![0.0, 0.0], vec![0.0, 0.0])).is_err());
    assert!(connection_bundle(&m, &TangentSample::new(vec![0.0], vec![1.0, 0.0])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(
        which in 0usize..3,
        x in prop::array::uniform2(-0.6..0.6f64),
        angle in 0.0..std::f64::consts::TAU,
        lambda in 0.2..5.0f64,
    ) {
        let m = [randers(), make_metric("funk", 2, &[]).unwrap(), make_metric("sphere2", 2, &[]).unwrap()][which].clone();
        let v = TangentSample::new(x.to_vec(), unit(angle));
        let a = ConnectionJets::compute(&m, &v, 1).unwrap();
        let b = ConnectionJets::compute(&m, &v.scaled(lambda), 1).unwrap();
        let tol = 1e-9;
        prop_assert!((b.lagrangian() - lambda * lambda * a.lagrangian()).abs() < tol * (1.0 + b.lagrangian()));
        for i in 0..2 {
            prop_assert!((b.spray(i) - lambda * lambda * a.spray(i)).abs() < tol * lambda * lambda);
            for j in 0..2 {
                prop_assert!((b.metric(i, j) - a.metric(i, j)).abs() < tol);
                prop_assert!((b.nonlinear(i, j) - lambda * a.nonlinear(i, j)).abs() < tol * lambda);
                for k in 0..2 {
                    prop_assert!((b.chern(i, j, k) - a.chern(i, j, k)).abs() < tol);
                    for l in 0..2 {
                        prop_assert!((lambda * b.chern_tensor(i, j, k, l) - a.chern_tensor(i, j, k, l)).abs() < tol);
                    }
                }
            }
        }
    }

    #[test]
    fn contractions(
        which in 0usize..2,
        x in prop::array::uniform2(-0.6..0.6f64),
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let m = [randers(), make_metric("funk", 2, &[]).unwrap()][which].clone();
        let y = unit(angle);
        let c = ConnectionJets::compute(&m, &TangentSample::new(x.to_vec(), y.clone()), 0).unwrap();
        prop_assert!((c.inner(&y, &y) - c.lagrangian()).abs() < 1e-10 * (1.0 + c.lagrangian()));
        for i in 0..2 {
            // N y = G and y^j Γ^i_jk = N^i_k
            let ny: f64 = (0..2).map(|j| c.nonlinear(i, j) * y[j]).sum();
            prop_assert!((ny - c.spray(i)).abs() < 1e-10);
            for k in 0..2 {
                let gy: f64 = (0..2).map(|j| c.chern(i, j, k) * y[j]).sum();
                prop_assert!((gy - c.nonlinear(i, k)).abs() < 1e-10);
                // torsion free
                prop_assert!((c.chern(i, 0, 1) - c.chern(i, 1, 0)).abs() < 1e-12);
            }
        }
    }
}
