use std::f64::consts::PI;

use fracflow_core::kernels::Matrix;
use fracflow_core::norms::{ck_beta_norm_on, Metric};
use fracflow_core::spectral::*;
use fracflow_core::FlowError;
use statrs::function::gamma::gamma;

fn closed_c_s(s: f64) -> f64 {
    (2.0 * PI).powf(1.0 + s) * PI / (2.0 * gamma(2.0 + s) * (PI * (1.0 + s) / 2.0).sin())
}

fn cos_mode(n: usize, k: usize) -> Vec<f64> {
    (0..n).map(|i| (2.0 * PI * (k * i) as f64 / n as f64).cos()).collect()
}

#[test]
fn c_s_schemes_agree() {
    for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let (a, b) = (c_s_series_split(s), c_s_graded(s));
        assert!((a - b).abs() / a < 1e-8, "s = {s}");
        assert!((c_s(s).unwrap() - closed_c_s(s)).abs() / a < 1e-12);
    }
    assert!((c_s(0.5).unwrap() - 26.318945069571623).abs() < 1e-11);
    assert!(matches!(c_s(1.0), Err(FlowError::Domain(_))));
}

#[test]
fn one_dimensional_symbol() {
    let s = 0.5;
    let cs = c_s(s).unwrap();
    let one = compute_symbol(&Matrix::identity(1), s, &[1.0]).unwrap();
    assert!((one - 2.0 * cs).abs() / one < 1e-12);
    let lam = 3.0;
    let v = compute_symbol(&Matrix::new(1, 1, vec![lam]), s, &[-2.0]).unwrap();
    assert!((v - 2.0 * cs * lam.powf(-1.25)).abs() / v < 1e-12);
    assert!(matches!(compute_symbol(&Matrix::new(1, 1, vec![-1.0]), s, &[1.0]), Err(FlowError::Domain(_))));
}

#[test]
fn planar_symbol() {
    let s = 0.5;
    let cs = c_s(s).unwrap();
    // ∫|cos φ|^{1+s}dφ = 2√π Γ(1 + s/2)/Γ(3/2 + s/2)
    let iso = compute_symbol(&Matrix::identity(2), s, &[0.3, 0.4]).unwrap();
    let want = cs * 2.0 * PI.sqrt() * gamma(1.0 + s / 2.0) / gamma(1.5 + s / 2.0);
    assert!((iso - want).abs() / want < 1e-12);
    let a = Matrix::new(2, 2, vec![2.0, 0.4, 0.4, 0.7]);
    let xi = [0.6, -0.8];
    let m = 200_000;
    let brute: f64 = (0..m)
        .map(|i| {
            let p = 2.0 * PI * (i as f64 + 0.5) / m as f64;
            let om = [p.cos(), p.sin()];
            (om[0] * xi[0] + om[1] * xi[1]).abs().powf(1.0 + s) * a.quad_form(&om).powf(-(3.0 + s) / 2.0)
        })
        .sum::<f64>()
        * cs
        * 2.0
        * PI
        / m as f64;
    let v = compute_symbol(&a, s, &xi).unwrap();
    assert!((v - brute).abs() / v < 1e-8);
    assert!((compute_symbol(&a, s, &[1.2, -1.6]).unwrap() - v).abs() < 1e-12 * v);
    let bad = Matrix::new(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
    assert!(matches!(compute_symbol(&bad, s, &xi), Err(FlowError::Domain(_))));
    assert!(matches!(compute_symbol(&Matrix::identity(3), s, &[1.0, 0.0, 0.0]), Err(FlowError::Domain(_))));
}

#[test]
fn symbol_bounds_over_directions_and_times() {
    let s = 0.5;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for it in 0..16 {
        let t = it as f64 * 0.4;
        let c = 1.0 + 0.5 * t.sin();
        let a = Matrix::new(2, 2, vec![c * 1.5, 0.3, 0.3, c]);
        for id in 0..64 {
            let p = 2.0 * PI * id as f64 / 64.0;
            let v = compute_symbol(&a, s, &[p.cos(), p.sin()]).unwrap();
            let w = compute_symbol(&a, s, &[2.0 * p.cos(), 2.0 * p.sin()]).unwrap();
            assert!((v - w).abs() <= 1e-12 * v);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    assert!(lo > 0.0 && hi / lo < 20.0);
}

#[test]
fn zero_forcing_stays_zero() {
    let st = SpectralState::new(64, 0.5).unwrap();
    let opts = EvolveOptions { dt: 1.0 / 64.0, norm_every: 0, alpha: 0.2 };
    let out = evolve(st, &|_| vec![0.0; 64], &|_| 1.0, 1.0, &opts).unwrap();
    assert!(out.values().iter().all(|&v| v == 0.0));
    let rep = max_principle_check(&out.history, 1.0);
    assert_eq!(rep.ratio, 0.0);
}

#[test]
fn single_mode_matches_closed_form() {
    let s = 0.5;
    let a = symbol_1d(1.0, s).unwrap();
    for k in [1usize, 3, 8] {
        let f = cos_mode(64, k);
        let lam = a * (k as f64).powf(1.0 + s);
        let opts = EvolveOptions { dt: 1.0 / 1024.0, norm_every: 0, alpha: 0.2 };
        for t in [0.05, 1.0] {
            let out = evolve(SpectralState::new(64, s).unwrap(), &|_| f.clone(), &|_| 1.0, t, &opts).unwrap();
            let want = 0.5 * (1.0 - (-lam * t).exp()) / lam;
            let got = out.coefficient(k as i64);
            assert!((got.re - want).abs() < 1e-10 && got.im.abs() < 1e-12);
            let conj = out.coefficient(-(k as i64));
            assert!((conj.re - got.re).abs() < 1e-15 && (conj.im + got.im).abs() < 1e-15);
        }
        let out = evolve(SpectralState::new(64, s).unwrap(), &|_| f.clone(), &|_| 1.0, 40.0, &EvolveOptions { dt: 0.05, norm_every: 0, alpha: 0.2 }).unwrap();
        assert!((out.coefficient(k as i64).re - 0.5 / lam).abs() < 1e-12);
    }
}

#[test]
fn mode_equation_residual() {
    let s = 0.5;
    let a = symbol_1d(1.0, s).unwrap();
    let f = cos_mode(32, 2);
    let lam = a * 2f64.powf(1.0 + s);
    let opts = EvolveOptions { dt: 1e-3, norm_every: 0, alpha: 0.2 };
    let at = |t: f64| {
        evolve(SpectralState::new(32, s).unwrap(), &|_| f.clone(), &|_| 1.0, t, &opts).unwrap().coefficient(2).re
    };
    let (t, d) = (0.02, 1e-6);
    let dudt = (at(t + d) - at(t - d)) / (2.0 * d);
    assert!((dudt + lam * at(t) - 0.5).abs() < 1e-8);
}

#[test]
fn maximum_principle() {
    let s = 0.5;
    let opts = EvolveOptions { dt: 1.0 / 1024.0, norm_every: 0, alpha: 0.2 };
    let f = cos_mode(64, 1);
    let out = evolve(SpectralState::new(64, s).unwrap(), &|_| f.clone(), &|_| 1.0, 1.0, &opts).unwrap();
    assert!(max_principle_check(&out.history, 1.0).ratio <= 1.0);
    for forcing in random_corpus(20, 12, 9) {
        let f: Vec<f64> = forcing.values(64);
        let out = evolve(SpectralState::new(64, s).unwrap(), &|_| f.clone(), &|_| 1.0, 2.0, &opts).unwrap();
        let rep = max_principle_check(&out.history, 2.0);
        assert!(rep.pass && rep.ratio <= 1.05);
    }
}

#[test]
fn operator_quadrature_matches_the_symbol() {
    let s = 0.5;
    let n = 256;
    let a = symbol_1d(1.0, s).unwrap();
    assert!(operator_quadrature(&vec![2.5f64; n], 1.0, s).unwrap().iter().all(|v| v.abs() < 1e-9 * 2.5));
    for k in [1usize, 8, 16, 32] {
        let u = cos_mode(n, k);
        let l = operator_quadrature(&u, 1.0, s).unwrap();
        let lam = -l[0];
        assert!(lam > 0.0);
        assert!(l.iter().zip(&u).all(|(x, y)| (x + lam * y).abs() < 1e-8 * lam));
        let ratio = lam / (a * (k as f64).powf(1.0 + s));
        assert!((ratio - 1.0).abs() < 1e-6, "k = {k}: {ratio}");
    }
    let u = cos_mode(n, 3);
    let v: Vec<f64> = (0..n).map(|i| (2.0 * PI * (5 * i) as f64 / n as f64).sin()).collect();
    let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| x + y).collect();
    let (lu, lv, lw) = (
        operator_quadrature(&u, 2.0, s).unwrap(),
        operator_quadrature(&v, 2.0, s).unwrap(),
        operator_quadrature(&w, 2.0, s).unwrap(),
    );
    assert!((0..n).all(|i| (lw[i] - lu[i] - lv[i]).abs() < 1e-10));
}

#[test]
fn schauder_single_modes() {
    let (s, alpha) = (0.5, 0.2);
    let ratios: Vec<f64> = [1usize, 2, 4, 8, 16]
        .iter()
        .map(|&k| {
            let r = schauder_constant(&|_| 1.0, s, alpha, 1.0, &[TrigForcing::single(k)], 128, 256).unwrap();
            r.constant
        })
        .collect();
    assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    assert!((ratios[4] - ratios[3]).abs() / ratios[4] < 0.25, "{ratios:?}");
    let f = cos_mode(128, 1);
    assert!(ck_beta_norm_on(&f, 0, alpha, &Metric::Periodic { length: 1.0 }).unwrap() > 1.0);
}

#[test]
fn schauder_corpus() {
    let (s, alpha) = (0.5, 0.2);
    let corpus = random_corpus(20, 12, 17);
    let c128 = schauder_constant(&|_| 1.0, s, alpha, 1.0, &corpus, 128, 256).unwrap();
    let c256 = schauder_constant(&|_| 1.0, s, alpha, 1.0, &corpus, 256, 256).unwrap();
    assert_eq!(c128.corpus_size, 20);
    assert!((c256.constant - c128.constant).abs() / c128.constant < 0.25);
    let varying = schauder_constant(&|t: f64| 1.0 + 0.5 * t.sin(), s, alpha, 1.0, &corpus, 128, 256).unwrap();
    assert!(varying.constant.is_finite() && varying.constant < 3.0 * c128.constant);
    let weaker = schauder_constant(&|_| 1.0, s, 0.1, 1.0, &corpus, 128, 256).unwrap();
    let stronger = schauder_constant(&|_| 1.0, s, 0.24, 1.0, &corpus, 128, 256).unwrap();
    assert!(weaker.constant <= c128.constant && c128.constant <= stronger.constant);
    assert!(matches!(
        schauder_constant(&|_| 1.0, s, 0.6, 1.0, &corpus, 128, 256),
        Err(FlowError::Domain(_))
    ));
}
