use std::f64::consts::PI;

use fracflow_core::geometry::*;
use fracflow_core::shapes::{ellipse, shifted_circle};
use fracflow_core::{FlowError, HeightField64};

fn mode3(n: usize) -> HeightField64 {
    HeightField64::from_fn(n, |t| 1.0 + 0.1 * (3.0 * t).cos()).unwrap()
}

#[test]
fn constant_field_has_zero_derivatives() {
    let f = build_field(&vec![1.0f64; 64]).unwrap();
    assert!(f.d1().iter().chain(f.d2()).all(|v| v.abs() < 1e-14));
    assert_eq!(f.dim(), 1);
}

#[test]
fn single_mode_second_derivative() {
    let f = mode3(64);
    assert!((f.d2()[0] + 0.9).abs() < 1e-10);
}

#[test]
fn bad_samples_are_rejected() {
    let mut v = vec![1.0; 32];
    v[5] = 0.0;
    assert!(matches!(build_field(&v), Err(FlowError::Domain(_))));
    assert!(matches!(build_field(&vec![1.0; 48]), Err(FlowError::Size(_))));
    assert!(matches!(build_field(&vec![1.0; 8]), Err(FlowError::Size(_))));
}

#[test]
fn areas() {
    assert!((area(&HeightField64::constant(64, 1.0).unwrap()) - PI).abs() < 1e-12);
    assert!((area(&HeightField64::constant(64, 2.0).unwrap()) - 4.0 * PI).abs() < 1e-12);
    let e = ellipse::<f64>(256, 1.3, 1.0 / 1.3).unwrap();
    assert!((area(&e) - PI).abs() < 1e-6);
}

#[test]
fn normals_and_jacobians() {
    for r in [1.0, 2.0] {
        let f = HeightField64::constant(32, r).unwrap();
        for i in [0, 7, 19] {
            let (nu, j) = normal_and_jacobian(&f, i);
            let th = f.angle(i);
            assert!((nu[0] - th.cos()).abs() < 1e-14 && (nu[1] - th.sin()).abs() < 1e-14);
            assert!((j - r).abs() < 1e-14);
        }
    }
    let (nu, j) = normal_and_jacobian(&mode3(64), 0);
    assert!((nu[0] - 1.0).abs() < 1e-14 && nu[1].abs() < 1e-14);
    assert!((j - 1.1).abs() < 1e-12);
}

#[test]
fn circle_metrics() {
    let f = HeightField64::constant(256, 1.0).unwrap();
    let m = shape_metrics(&f, 0.5);
    assert!((m.slope_constant - 0.5f64.sqrt()).abs() < 1e-3);
    assert!((m.min_curvature - 1.0).abs() < 1e-12);
    assert!(m.convex);
    assert_eq!((m.inradius, m.circumradius), (1.0, 1.0));
}

#[test]
fn slope_constant_is_first_order_on_the_circle() {
    for s in [0.3f64, 0.5, 0.7] {
        let f = HeightField64::constant(256, 1.0).unwrap();
        assert!((slope_constant(&f, s) - 2f64.powf(-s)).abs() < 1e-2);
    }
}

#[test]
fn five_lobed_field_is_not_convex() {
    let f = HeightField64::from_fn(128, |t| 1.0 + 0.35 * (5.0 * t).cos()).unwrap();
    assert!(!is_convex(&f));
    assert!(!shape_metrics(&f, 0.5).convex);
}

#[test]
fn rescale_examples() {
    let f = HeightField64::constant(64, 2.0).unwrap();
    let g = rescale_and_center(&f, PI).unwrap();
    assert!(g.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
    let e = ellipse::<f64>(128, 1.3, 1.0 / 1.3).unwrap().scaled(1.7).unwrap();
    let g = rescale_and_center(&e, 2.0).unwrap();
    assert!((area(&g) - 2.0).abs() < 1e-12 * 2.0);
    let c = shifted_circle::<f64>(128, 0.3).unwrap();
    let g = rescale_and_center(&c, PI).unwrap();
    assert!(g.values().iter().all(|v| (v - 1.0).abs() < 1e-6));
}

#[test]
fn supporting_lines_on_convex_fields() {
    let e = ellipse::<f64>(128, 1.3, 1.0 / 1.3).unwrap();
    for i in 0..128 {
        let (nu, _) = normal_and_jacobian(&e, i);
        let x = e.point(i);
        for j in 0..128 {
            let y = e.point(j);
            assert!((x[0] - y[0]) * nu[0] + (x[1] - y[1]) * nu[1] >= -1e-12);
        }
    }
}
