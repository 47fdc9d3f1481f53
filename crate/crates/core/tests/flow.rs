use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fracflow_core::flow::*;
use fracflow_core::geometry::{area, barycenter, is_convex, HeightField};
use fracflow_core::shapes::{ellipse, random_convex};
use fracflow_core::FlowError;

fn sup_diff(a: &HeightField<f64>, b: &HeightField<f64>) -> f64 {
    a.values().iter().zip(b.values()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn circle_is_an_equilibrium() {
    let s = 0.5;
    let c = HeightField::<f64>::constant(64, 1.0).unwrap();
    let st = FlowState::new(c.clone(), s, 1e-3).unwrap();
    assert!(velocity(&st.last_sample).iter().all(|v| v.abs() < 1e-10));
    let (next, info) = step(&st, 1e-3).unwrap();
    assert!(sup_diff(&next.field, &c) < 1e-12);
    assert!(info.volume_drift_raw.abs() < 1e-12);

    let big = HeightField::<f64>::constant(64, 2.0).unwrap();
    let st = FlowState::new(big, s, 1e-3).unwrap();
    assert!(velocity(&st.last_sample).iter().all(|v| v.abs() < 1e-10));
    let (next, _) = step(&st, 1e-3).unwrap();
    assert!(sup_diff(&next.field, &c) < 1e-12);

    let trace = run(c, &FlowConfig { dt: Some(0.01), record_every: 1, ..FlowConfig::new(s, 0.2) }).unwrap();
    assert!(trace.halt.is_none());
    assert!(matches!(fit_exponential_rate(&trace.records, (0.0, 0.2)), Err(FlowError::Degenerate(_))));
}

#[test]
fn constructor_rejects_bad_input() {
    let c = HeightField::<f64>::constant(32, 1.0).unwrap();
    assert!(matches!(FlowState::new(c.clone(), 1.0, 1e-3), Err(FlowError::Domain(_))));
    assert!(matches!(FlowState::new(c.clone(), 0.5, 0.0), Err(FlowError::Domain(_))));
    assert!(run(c, &FlowConfig::new(0.5, 0.0)).is_err());
}

#[test]
fn ellipse_step() {
    let s = 0.5;
    let e = ellipse::<f64>(128, 1.3, 1.0 / 1.3).unwrap();
    let st = FlowState::new(e, s, 1e-3).unwrap();
    let v = velocity(&st.last_sample);
    assert!(weighted_mean(&st.field, &v).abs() < 1e-4);
    let dt = stable_dt(&st.field, s, 1.0).unwrap();
    let (next, a) = step(&st, dt).unwrap();
    assert!((area(&next.field) - std::f64::consts::PI).abs() < 1e-10);
    let b = barycenter(&next.field);
    assert!(b[0].hypot(b[1]) < 1e-10);
    let (_, half) = step(&st, dt / 2.0).unwrap();
    let ratio = a.volume_drift_raw / half.volume_drift_raw;
    assert!((ratio - 4.0).abs() < 1.2, "{ratio}");
}

#[test]
fn ellipse_relaxes_monotonically() {
    let s = 0.5;
    let e = ellipse::<f64>(64, 1.3, 1.0 / 1.3).unwrap();
    let cfg = FlowConfig { record_every: 10, perimeter_every: 10, ..FlowConfig::new(s, 0.5) };
    let trace = run(e, &cfg).unwrap();
    assert!(trace.halt.is_none() && trace.stats.convex_every_step);
    let dev: Vec<f64> = trace.records.iter().map(|r| r.monitors.sup_dev).collect();
    assert!(dev.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    assert!(*dev.last().unwrap() < 0.5 * dev[0]);
    let per: Vec<f64> = trace.records.iter().filter_map(|r| r.perimeter).collect();
    assert!(per.len() >= 2 && per.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    assert!(trace.stats.max_abs_v_mean < 1e-3);
    let fit = fit_exponential_rate(&trace.records, (0.05, 0.5)).unwrap();
    assert!(fit.c > 0.0 && fit.points >= 3);
}

#[test]
fn random_convex_stays_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let f = random_convex::<f64>(64, 4, &mut rng).unwrap();
        let trace = run(f, &FlowConfig::new(0.3, 0.2)).unwrap();
        assert!(trace.halt.is_none(), "{:?}", trace.halt);
        assert!(is_convex(&trace.final_state.field));
        assert!(trace.stats.max_sup_h <= trace.stats.initial_sup_h * (1.0 + 1e-6));
    }
}

#[test]
fn first_order_in_time() {
    let s = 0.5;
    let e = ellipse::<f64>(32, 1.2, 1.0 / 1.2).unwrap();
    let dt = stable_dt(&e, s, 0.5).unwrap();
    let t_end = 100.0 * dt;
    let at = |k: f64| {
        let cfg = FlowConfig { dt: Some(dt / k), record_every: 1000, ..FlowConfig::new(s, t_end) };
        run(e.clone(), &cfg).unwrap().final_state.field
    };
    let (a, b, c) = (at(1.0), at(2.0), at(4.0));
    let ratio = sup_diff(&a, &b) / sup_diff(&b, &c);
    assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
}

#[test]
fn fit_recovers_a_synthetic_rate() {
    let e = ellipse::<f64>(32, 1.1, 1.0 / 1.1).unwrap();
    let trace = run(e, &FlowConfig { dt: Some(0.01), record_every: 1, ..FlowConfig::new(0.5, 0.05) }).unwrap();
    let mut recs = trace.records.clone();
    for (i, r) in recs.iter_mut().enumerate() {
        r.t = i as f64;
        r.monitors.sup_dev = 3.0 * (-0.7 * i as f64).exp();
    }
    let fit = fit_exponential_rate(&recs, (0.0, 5.0)).unwrap();
    assert!((fit.c - 0.7).abs() < 1e-12 && (fit.big_c - 3.0).abs() < 1e-12 && fit.residual < 1e-12);
    assert!(matches!(fit_exponential_rate(&recs, (0.5, 1.5)), Err(FlowError::Degenerate(_))));
}
