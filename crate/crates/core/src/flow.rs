//! Volume-preserving fractional curvature flow of convex curves in
//! height-function form: ∂_t h = V √(h² + h'²)/h, V = −(H − H̄), followed by
//! renormalization to area π about the barycenter.

use serde::Serialize;

use crate::curvature::{boundary_curvature, fractional_perimeter, CurvatureMethod, CurvatureSample};
use crate::error::{FlowError, Result};
use crate::geometry::{area, is_convex, jacobian, min_curvature, rescale_and_center, slope_constant, HeightField};
use crate::norms::{ck_beta_unchecked, Metric};
use crate::scalar::Real;
use crate::spectral::c_s;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowConfig<T: Real> {
    pub s: T,
    pub t_end: T,
    /// fixed step; otherwise the stability rule is re-evaluated every step
    pub dt: Option<T>,
    pub c_cfl: T,
    /// keep a trace record every this many steps (the last step is always kept)
    pub record_every: usize,
    /// fractional perimeter on recorded steps that are multiples of this
    pub perimeter_every: usize,
    /// copy of h every this many steps, 0 for none
    pub snapshot_every: usize,
}

impl<T: Real> FlowConfig<T> {
    pub fn new(s: T, t_end: T) -> Self {
        Self { s, t_end, dt: None, c_cfl: T::lit(1.5), record_every: 50, perimeter_every: 50, snapshot_every: 0 }
    }
}

/// dt = c_cfl (2π/N)^{1+s} / a_ref with a_ref = 2c_s (min h)^{-(2+s)/2}.
pub fn stable_dt<T: Real>(field: &HeightField<T>, s: T, c_cfl: T) -> Result<T> {
    let two = T::lit(2.0);
    let a_ref = two * T::lit(c_s(s.f64())?) * field.min().powf(-(two + s) / two);
    Ok(c_cfl * (T::TAU() / T::idx(field.len())).powf(T::one() + s) / a_ref)
}

#[derive(Debug, Clone)]
pub struct FlowState<T: Real> {
    pub t: T,
    pub field: HeightField<T>,
    pub dt: T,
    pub step_index: usize,
    pub last_sample: CurvatureSample<T>,
}

impl<T: Real> FlowState<T> {
    pub fn new(field: HeightField<T>, s: T, dt: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(FlowError::Domain(format!("s = {s} must lie in (0, 1)")));
        }
        if !(dt > T::zero()) {
            return Err(FlowError::Domain("dt must be positive".into()));
        }
        if !is_convex(&field) {
            return Err(FlowError::Geometry("initial field is not convex".into()));
        }
        let last_sample = sample(&field, s);
        Ok(Self { t: T::zero(), field, dt, step_index: 0, last_sample })
    }
}

fn sample<T: Real>(field: &HeightField<T>, s: T) -> CurvatureSample<T> {
    let h = boundary_curvature(field, s);
    CurvatureSample::from_values(field, s, h, CurvatureMethod::BoundaryIntegral)
}

/// V = −(H − H̄) per node.
pub fn velocity<T: Real>(sample: &CurvatureSample<T>) -> Vec<T> {
    sample.values.iter().map(|&h| sample.average - h).collect()
}

/// ∫V dH¹ / ∫dH¹.
pub fn weighted_mean<T: Real>(field: &HeightField<T>, v: &[T]) -> T {
    let (mut num, mut den) = (T::zero(), T::zero());
    for (i, &vi) in v.iter().enumerate() {
        let j = jacobian(field, i);
        num = num + vi * j;
        den = den + j;
    }
    num / den
}

/// Per-step quantities available without extra cost.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepInfo {
    pub volume_drift_raw: f64,
    pub v_mean: f64,
    pub sup_h: f64,
}

/// One explicit Euler step with the given dt, then renormalization.
pub fn step<T: Real>(state: &FlowState<T>, dt: T) -> Result<(FlowState<T>, StepInfo)> {
    let s = state.last_sample.s;
    let field = &state.field;
    let v = velocity(&state.last_sample);
    let v_mean = weighted_mean(field, &v);
    let moved: Vec<T> = (0..field.len())
        .map(|i| {
            let h = field.values()[i];
            h + dt * v[i] * jacobian(field, i) / h
        })
        .collect();
    let moved = HeightField::new(moved)
        .map_err(|e| FlowError::FlowEvent(format!("step {} produced an invalid field: {e}", state.step_index + 1)))?;
    let drift = area(&moved) - area(field);
    let next = rescale_and_center(&moved, T::PI())?;
    if !is_convex(&next) {
        return Err(FlowError::FlowEvent(format!(
            "convexity lost at step {} (t = {}), min curvature {:e}",
            state.step_index + 1,
            state.t + dt,
            min_curvature(&next)
        )));
    }
    let last_sample = sample(&next, s);
    let info = StepInfo { volume_drift_raw: drift.f64(), v_mean: v_mean.f64(), sup_h: last_sample.max().f64() };
    Ok((
        FlowState { t: state.t + dt, field: next, dt: state.dt, step_index: state.step_index + 1, last_sample },
        info,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorRecord {
    pub sup_h: f64,
    pub avg_h: f64,
    pub dissipation: f64,
    pub sup_dev: f64,
    pub slope_constant: f64,
    pub inradius: f64,
    pub circumradius: f64,
    pub c1s_norm: f64,
    pub min_curvature: f64,
}

pub fn monitors<T: Real>(state: &FlowState<T>) -> MonitorRecord {
    let f = &state.field;
    let smp = &state.last_sample;
    MonitorRecord {
        sup_h: smp.max().f64(),
        avg_h: smp.average.f64(),
        dissipation: smp.dissipation.f64(),
        sup_dev: f.values().iter().fold(T::zero(), |m, &h| m.max((h - T::one()).abs())).f64(),
        slope_constant: slope_constant(f, smp.s).f64(),
        inradius: f.min().f64(),
        circumradius: f.max().f64(),
        c1s_norm: ck_beta_unchecked(f.values(), 1, smp.s, &Metric::Chordal).f64(),
        min_curvature: min_curvature(f).f64(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowRecord {
    pub step: usize,
    pub t: f64,
    #[serde(flatten)]
    pub monitors: MonitorRecord,
    pub convex: bool,
    pub volume_drift_raw: f64,
    pub v_mean: f64,
    pub perimeter: Option<f64>,
}

/// Extremes over every step, recorded or not.
#[derive(Debug, Clone, Default, Serialize)]
pub struct FlowStats {
    pub steps: usize,
    pub max_abs_v_mean: f64,
    pub max_sup_h: f64,
    pub initial_sup_h: f64,
    pub max_abs_drift: f64,
    pub convex_every_step: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowHalt {
    pub code: &'static str,
    pub message: String,
    pub t: f64,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct FlowTrace<T: Real> {
    pub records: Vec<FlowRecord>,
    pub stats: FlowStats,
    pub halt: Option<FlowHalt>,
    pub final_state: FlowState<T>,
    pub snapshots: Vec<Snapshot<T>>,
}

#[derive(Debug, Clone)]
pub struct Snapshot<T: Real> {
    pub step: usize,
    pub t: f64,
    pub h: Vec<T>,
}

fn record<T: Real>(state: &FlowState<T>, info: Option<StepInfo>, perimeter: bool) -> Result<FlowRecord> {
    let p = if perimeter { Some(fractional_perimeter(&state.field, state.last_sample.s)?.f64()) } else { None };
    Ok(FlowRecord {
        step: state.step_index,
        t: state.t.f64(),
        monitors: monitors(state),
        convex: is_convex(&state.field),
        volume_drift_raw: info.map_or(0.0, |i| i.volume_drift_raw),
        v_mean: info.map_or_else(|| weighted_mean(&state.field, &velocity(&state.last_sample)).f64(), |i| i.v_mean),
        perimeter: p,
    })
}

/// Integrate to `t_end`, the last step shortened to land on it. Module
/// errors during stepping end the run and are reported as a halt.
pub fn run<T: Real>(initial: HeightField<T>, cfg: &FlowConfig<T>) -> Result<FlowTrace<T>> {
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => stable_dt(&initial, cfg.s, cfg.c_cfl)?,
    };
    if !(cfg.t_end > T::zero()) {
        return Err(FlowError::Domain("horizon T must be positive".into()));
    }
    let mut state = FlowState::new(initial, cfg.s, dt)?;
    let rec_every = cfg.record_every.max(1);
    let per_every = cfg.perimeter_every.max(1);
    let mut records = vec![record(&state, None, true)?];
    let sup0 = state.last_sample.max().f64();
    let mut stats = FlowStats {
        steps: 0,
        max_abs_v_mean: records[0].v_mean.abs(),
        max_sup_h: sup0,
        initial_sup_h: sup0,
        max_abs_drift: 0.0,
        convex_every_step: true,
    };
    let mut halt = None;
    let mut snapshots = Vec::new();
    let end_slack = T::tol(1e-12) * cfg.t_end;
    while state.t < cfg.t_end - end_slack {
        if cfg.dt.is_none() {
            state.dt = stable_dt(&state.field, cfg.s, cfg.c_cfl)?;
        }
        let h = state.dt.min(cfg.t_end - state.t);
        match step(&state, h) {
            Ok((next, info)) => {
                state = next;
                stats.steps += 1;
                stats.max_abs_v_mean = stats.max_abs_v_mean.max(info.v_mean.abs());
                stats.max_sup_h = stats.max_sup_h.max(info.sup_h);
                stats.max_abs_drift = stats.max_abs_drift.max(info.volume_drift_raw.abs());
                let last = state.t >= cfg.t_end - end_slack;
                if state.step_index % rec_every == 0 || last {
                    let with_p = state.step_index % per_every == 0;
                    records.push(record(&state, Some(info), with_p)?);
                }
                if cfg.snapshot_every > 0 && state.step_index % cfg.snapshot_every == 0 {
                    snapshots.push(Snapshot { step: state.step_index, t: state.t.f64(), h: state.field.values().to_vec() });
                }
            }
            Err(e) => {
                if matches!(e, FlowError::FlowEvent(_)) {
                    stats.convex_every_step = false;
                }
                halt = Some(FlowHalt { code: e.code(), message: e.to_string(), t: state.t.f64(), step: state.step_index });
                break;
            }
        }
    }
    Ok(FlowTrace { records, stats, halt, final_state: state, snapshots })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    /// decay rate in sup|h−1| ≈ C e^{−ct}
    pub c: f64,
    pub big_c: f64,
    /// root-mean-square residual of the log fit
    pub residual: f64,
    pub points: usize,
}

/// Signals at or below this are roundoff from renormalization.
pub const NOISE_FLOOR: f64 = 1e-11;

/// Least squares of log sup|h−1| against t over records with t in `window`.
pub fn fit_exponential_rate(records: &[FlowRecord], window: (f64, f64)) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1)
        .map(|r| (r.t, r.monitors.sup_dev))
        .collect();
    if pts.len() < 3 {
        return Err(FlowError::Degenerate(format!("{} records in window [{}, {}]", pts.len(), window.0, window.1)));
    }
    if let Some(&(t, v)) = pts.iter().find(|p| !(p.1 > NOISE_FLOOR)) {
        return Err(FlowError::Degenerate(format!("sup|h-1| = {v:e} at t = {t} is at the noise floor")));
    }
    let m = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(t, v)| (a + t, b + v.ln()));
    let (tm, ym) = (st / m, sy / m);
    let (mut stt, mut sty) = (0.0, 0.0);
    for &(t, v) in &pts {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (v.ln() - ym);
    }
    if stt <= 0.0 {
        return Err(FlowError::Degenerate("window holds a single time".into()));
    }
    let slope = sty / stt;
    let icpt = ym - slope * tm;
    let residual = (pts.iter().map(|&(t, v)| (v.ln() - icpt - slope * t).powi(2)).sum::<f64>() / m).sqrt();
    Ok(RateFit { c: -slope, big_c: icpt.exp(), residual, points: pts.len() })
}
