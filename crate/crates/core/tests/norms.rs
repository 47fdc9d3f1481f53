use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracflow_core::norms::*;
use fracflow_core::FlowError;

fn grid(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..n).map(|i| f(TAU * i as f64 / n as f64)).collect()
}

fn trig_poly(rng: &mut ChaCha8Rng, kmin: usize, kmax: usize) -> Vec<(usize, f64, f64)> {
    (0..rng.gen_range(1..=4))
        .map(|_| (rng.gen_range(kmin..=kmax), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU)))
        .collect()
}

fn eval(modes: &[(usize, f64, f64)], n: usize) -> Vec<f64> {
    grid(n, |t| modes.iter().map(|&(k, a, p)| a * (k as f64 * t + p).cos()).sum())
}

#[test]
fn seminorm_examples() {
    assert_eq!(holder_seminorm(&vec![3.0f64; 64], 0.5), 0.0);
    let one = holder_seminorm(&grid(512, f64::cos), 1.0);
    assert!((one - 1.0).abs() < 1e-3);
    let eight = holder_seminorm(&grid(512, |t| (8.0 * t).cos()), 1.0);
    assert!((eight / one - 8.0).abs() < 8e-2);
}

#[test]
fn seminorm_never_decreases_under_refinement() {
    let f = |t: f64| (3.0 * t).sin() + 0.3 * (7.0 * t).cos();
    for beta in [0.3, 0.7, 1.0] {
        assert!(holder_seminorm(&grid(256, f), beta) >= holder_seminorm(&grid(128, f), beta));
    }
}

#[test]
fn ck_examples() {
    assert_eq!(ck_beta_norm(&vec![1.0f64; 64], 2, 0.5).unwrap(), 1.0);
    assert!((ck_beta_norm(&grid(64, f64::cos), 1, 0.0).unwrap() - 2.0).abs() < 1e-12);
    for k in [2.0, 4.0, 8.0] {
        let eps = 0.01;
        let v = ck_beta_norm(&grid(128, |t| eps * (k * t).cos()), 1, 0.0).unwrap();
        assert!((v / (eps * (1.0 + k)) - 1.0).abs() < 0.05);
    }
    let u = grid(128, |t| (5.0 * t).sin());
    let beta = 0.4;
    let direct = u.iter().fold(0.0f64, |m, v| m.max(v.abs())) + holder_seminorm(&u, beta);
    assert!((ck_beta_norm(&u, 0, beta).unwrap() - direct).abs() < 1e-14);
    let norms: Vec<f64> = (0..3).map(|k| ck_beta_norm(&u, k, beta).unwrap()).collect();
    assert!(norms.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn resolution_and_domain_errors() {
    let u = grid(64, |t| (20.0 * t).cos());
    assert!(matches!(ck_beta_norm(&u, 1, 0.5), Err(FlowError::Resolution(_))));
    assert!(matches!(ck_beta_norm(&grid(64, f64::cos), 1, 1.0), Err(FlowError::Domain(_))));
    assert!(matches!(fourier_holder_norm(&grid(64, f64::cos), 1.0), Err(FlowError::Domain(_))));
    assert!(matches!(interpolation_check(&vec![0.0f64; 64], 0.5, 1.5, 0.5), Err(FlowError::Degenerate(_))));
}

#[test]
fn partition_of_unity() {
    let n = 1024;
    for k in 1..=n / 4 {
        let total: f64 = (0..10).map(|j| delta(k as f64 / 2f64.powi(j))).sum();
        assert!((total - 1.0).abs() < 1e-12, "k = {k}");
    }
    assert_eq!(eta(1.0), 1.0);
    assert_eq!(eta(2.0), 0.0);
}

#[test]
fn blocks() {
    let n = 256;
    for j in 1..5u32 {
        let p = 2f64.powi(j as i32);
        let u = grid(n, |t| (p * t).cos());
        let b = paley_block(&u, j);
        assert!(b.iter().zip(&u).all(|(x, y)| (x - y).abs() < 1e-12));
        let far = grid(n, |t| (4.0 * p * t).cos());
        assert!(paley_block(&far, j).iter().all(|v| v.abs() < 1e-12));
        // support of δ(2^{-j}·) is the open annulus (2^{j-1}, 2^{j+1})
        for k in [p / 2.0, 2.0 * p] {
            let edge = grid(n, |t| (k * t).cos());
            assert!(paley_block(&edge, j).iter().all(|v| v.abs() < 1e-12));
        }
    }
    let u = grid(n, |t| 0.7 + (3.0 * t).sin() + 0.2 * (40.0 * t).cos());
    let rec = PaleyBlocks::new(&u).reconstruct();
    assert!(rec.iter().zip(&u).all(|(r, v)| (r - (v - 0.7)).abs() < 1e-10));
}

#[test]
fn fourier_norm_examples() {
    assert!(fourier_holder_norm(&vec![2.0f64; 128], 0.5).unwrap() < 1e-14);
    let u = grid(256, |t| (32.0 * t).cos());
    assert!((fourier_holder_norm(&u, 0.5).unwrap() - 2f64.powf(2.5)).abs() < 1e-8);
}

#[test]
fn fourier_norm_is_equivalent_on_a_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let gamma = 1.5;
    for _ in 0..20 {
        let modes = trig_poly(&mut rng, 2, 24);
        let u = eval(&modes, 256);
        let r = fourier_holder_norm(&u, gamma).unwrap() / ck_beta_norm(&u, 1, gamma - 1.0).unwrap();
        assert!(r > 1.0 / 50.0 && r < 50.0, "{r}");
    }
}

#[test]
fn interpolation_examples() {
    assert!((interpolation_check(&vec![1.0f64; 64], 0.5, 1.5, 0.5).unwrap() - 1.0).abs() < 1e-14);
    assert!(interpolation_check(&grid(128, f64::cos), 0.5, 1.5, 0.5).unwrap() <= 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let worst = |n: usize, rng: &mut ChaCha8Rng| {
        (0..50)
            .map(|_| {
                let m = trig_poly(rng, 1, 16);
                interpolation_check(&eval(&m, n), 0.3, 1.7, 0.5).unwrap()
            })
            .fold(0.0f64, f64::max)
    };
    let a = worst(128, &mut rng.clone());
    let b = worst(256, &mut rng);
    assert!(a.is_finite() && (a - b).abs() / a < 0.2, "{a} {b}");
}
