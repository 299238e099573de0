//! Curvature against the Riemann oracle, constant-curvature models and
//! locally Minkowski Randers metrics.

mod common;

use common::{relative, LeviCivita};
use finsler::curvature::{
    affine_curvature_rv, chern_curvature, flag_predecessor, ChartVectorField,
};
use finsler::polynomial::Polynomial;
use finsler::verify::fd_flag_predecessor;
use finsler::{make_metric, GeometryError, TangentSample};
use proptest::prelude::*;

fn quadratic_field(name: &str, center: &[f64], coeffs: &[[f64; 6]; 2]) -> ChartVectorField {
    ChartVectorField::polynomial_about(
        name,
        center.to_vec(),
        coeffs
            .iter()
            .map(|c| Polynomial::from_coefficients(2, c).unwrap())
            .collect(),
    )
}

fn unit(angle: f64) -> Vec<f64> {
    vec![angle.cos(), angle.sin()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_curvature_is_riemann_on_riemannian(
        x in prop::array::uniform2(-0.8..0.8f64),
        v in prop::array::uniform6(-1.0..1.0f64),
        w in prop::array::uniform6(-1.0..1.0f64),
        dirs in prop::array::uniform6(-1.0..1.0f64),
    ) {
        let m = make_metric("riemannian_poly", 2, &[]).unwrap();
        let mut v0 = v;
        v0[0] += 2.0; // keep V(x) away from zero
        let v_field = quadratic_field("V", &x, &[v0, w]);
        let fx = ChartVectorField::constant("X", dirs[0..2].to_vec());
        let fy = ChartVectorField::constant("Y", dirs[2..4].to_vec());
        let fz = ChartVectorField::constant("Z", dirs[4..6].to_vec());
        let got = affine_curvature_rv(&m, &v_field, &fx, &fy, &fz, &x).unwrap();
        let want = LeviCivita::at(&m, &x).riemann(&dirs[0..2], &dirs[2..4], &dirs[4..6]);
        prop_assert!(relative(&got, &want) < 1e-10, "{:?} vs {:?}", got, want);
        let chern = chern_curvature(
            &m,
            &TangentSample::new(x.to_vec(), v_field.value(&x).unwrap()),
            &dirs[0..2], &dirs[2..4], &dirs[4..6],
        ).unwrap();
        prop_assert!(relative(&chern, &want) < 1e-10);
    }

    #[test]
    fn chern_curvature_symmetries(
        which in 0usize..2,
        x in prop::array::uniform2(-0.6..0.6f64),
        angle in 0.0..std::f64::consts::TAU,
        dirs in prop::array::uniform6(-1.0..1.0f64),
        lambda in 0.3..3.0f64,
    ) {
        let m = [
            make_metric("randers", 2, &[]).unwrap(),
            make_metric("funk", 2, &[]).unwrap(),
        ][which].clone();
        let v = TangentSample::new(x.to_vec(), unit(angle));
        let (a, b, c) = (&dirs[0..2], &dirs[2..4], &dirs[4..6]);
        let r = chern_curvature(&m, &v, a, b, c).unwrap();
        let swapped = chern_curvature(&m, &v, b, a, c).unwrap();
        let neg: Vec<f64> = swapped.iter().map(|s| -s).collect();
        prop_assert!(relative(&r, &neg) < 1e-10);
        let scaled = chern_curvature(&m, &v.scaled(lambda), a, b, c).unwrap();
        prop_assert!(relative(&r, &scaled) < 1e-9);
    }
}

#[test]
fn riemannian_flag_is_gauss_curvature() {
    let m = make_metric("riemannian_poly", 2, &[]).unwrap();
    for x in [[0.0, 0.0], [0.4, -0.3], [-0.7, 0.6]] {
        let k = common::gauss_curvature(&m, &x);
        for (v, u) in [([1.0, 0.0], [0.0, 1.0]), ([0.3, -0.8], [0.9, 0.2])] {
            let flag =
                flag_predecessor(&m, &TangentSample::new(x.to_vec(), v.to_vec()), &u, &u).unwrap();
            assert!(
                (flag.k - k).abs() < 1e-9 * (1.0 + k.abs()),
                "{} vs {}",
                flag.k,
                k
            );
        }
    }
}

#[test]
fn sphere_has_unit_flag_curvature() {
    let m = make_metric("sphere2", 2, &[]).unwrap();
    for x in [[0.0, 0.0], [1.2, -0.5], [-1.7, 1.7]] {
        for angle in [0.0, 0.7, 2.0] {
            let v = TangentSample::new(x.to_vec(), unit(angle));
            let u = unit(angle + 1.3);
            let w = unit(angle - 0.4);
            let k = flag_predecessor(&m, &v, &u, &u).unwrap().k;
            assert!((k - 1.0).abs() < 1e-10, "{k}");
            // constant curvature makes the predecessor constant in w too
            let kw = flag_predecessor(&m, &v, &u, &w).unwrap().k;
            assert!((kw - 1.0).abs() < 1e-10, "{kw}");
        }
    }
}

#[test]
fn funk_has_constant_negative_flag_curvature() {
    let m = make_metric("funk", 2, &[]).unwrap();
    for x in [[0.0, 0.0], [0.5, 0.1], [-0.3, -0.6]] {
        for angle in [0.2, 1.9, 4.4] {
            let v = TangentSample::new(x.to_vec(), unit(angle));
            let u = unit(angle + 1.0);
            let k = flag_predecessor(&m, &v, &u, &u).unwrap().k;
            assert!((k + 0.25).abs() < 1e-9, "{k}");
            let fd = fd_flag_predecessor(&m, &v, &u, &u, 1e-5).unwrap().k;
            assert!((fd + 0.25).abs() < 1e-6, "{fd}");
        }
    }
}

#[test]
fn constant_randers_is_flat() {
    // constant b gives a Minkowski norm, hence zero Chern curvature
    let m = make_metric("randers", 2, &[0.3, -0.2]).unwrap();
    let v = TangentSample::new(vec![0.1, 0.4], vec![0.6, -0.8]);
    let r = chern_curvature(&m, &v, &[1.0, 0.5], &[-0.2, 1.0], &[0.7, 0.7]).unwrap();
    assert!(r.iter().all(|c| c.abs() < 1e-13), "{r:?}");
}

#[test]
fn degenerate_flags_are_rejected() {
    let m = make_metric("sphere2", 2, &[]).unwrap();
    let v = TangentSample::new(vec![0.0, 0.0], vec![1.0, 0.0]);
    assert!(matches!(
        flag_predecessor(&m, &v, &[2.0, 0.0], &[0.0, 1.0]),
        Err(GeometryError::DegenerateFlag { .. })
    ));
    assert!(matches!(
        flag_predecessor(&m, &v, &[0.0, 1.0, 0.0], &[0.0, 1.0]),
        Err(GeometryError::DimensionMismatch { .. })
    ));
}
