//! Subcommand drivers. Each writes its artifacts through one `Writer` and
//! ends with the manifest.

use std::f64::consts::PI;

use serde::Serialize;
use sha2::{Digest, Sha256};
use serde_json::{json, Value};

use fracflow_core::curvature::{
    curvature_field_with, fractional_perimeter, CurvatureMethod, CurvatureOptions,
};
use fracflow_core::flow::{fit_exponential_rate, run, FlowConfig, FlowRecord};
use fracflow_core::geometry::{rescale_and_center, shape_metrics, HeightField};
use fracflow_core::norms::{ck_beta_norm, fourier_holder_norm, holder_seminorm, interpolation_check};
use fracflow_core::spectral::{
    c_s, evolve, max_principle_check, random_corpus, schauder_constant, symbol_1d, EvolveOptions, SpectralState,
};
use fracflow_core::FlowError;

use crate::config::{RunConfig, Subcommand};
use crate::output::{fmt, Writer};
use crate::verify::{run_suite, trig_corpus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_HALT: i32 = 3;
pub const EXIT_MODULE: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug)]
pub enum RunError {
    Module(FlowError),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Module(_) => EXIT_MODULE,
            RunError::Io(_) => EXIT_IO,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            RunError::Module(e) => e.code(),
            RunError::Io(_) => "io",
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Module(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<FlowError> for RunError {
    fn from(e: FlowError) -> Self {
        RunError::Module(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
}

pub fn run_subcommand(cfg: &RunConfig, sub: Subcommand) -> Result<Outcome, RunError> {
    let mut w = Writer::new(&cfg.output_dir)?;
    let mut pairs = cfg.to_pairs();
    pairs.insert("subcommand".into(), sub.to_string());
    // the output location is not a numerical input; it stays in the manifest only
    let mut numeric = pairs.clone();
    numeric.remove("output_dir");
    let hash = config_hash(&numeric);
    let header = json!({"kind": "config", "config": numeric, "seed": cfg.seed, "config_hash": hash});
    let out = match sub {
        Subcommand::Flow => flow(cfg, &mut w, header),
        Subcommand::Curvature => curvature(cfg, &mut w, header),
        Subcommand::Spectral => spectral(cfg, &mut w, header),
        Subcommand::Norms => norms(cfg, &mut w, header),
        Subcommand::Verify => verify(cfg, &mut w, header),
    };
    match out {
        Ok(o) => {
            w.finish(&sub.to_string(), cfg.seed, &pairs, o.exit_code)?;
            Ok(o)
        }
        Err(e) => {
            // record what was written before the failure
            w.finish(&sub.to_string(), cfg.seed, &pairs, e.exit_code())?;
            Err(e)
        }
    }
}

fn config_hash(numeric: &std::collections::BTreeMap<String, String>) -> String {
    let text = serde_json::to_string(numeric).unwrap_or_default();
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn initial_field(cfg: &RunConfig) -> Result<HeightField<f64>, FlowError> {
    rescale_and_center(&cfg.shape.build::<f64>(cfg.n, cfg.seed)?, PI)
}

fn shape_rows(f: &HeightField<f64>) -> Vec<String> {
    (0..f.len())
        .map(|i| {
            let p = f.point(i);
            format!("{},{},{},{}", fmt(f.angle(i)), fmt(f.values()[i]), fmt(p[0]), fmt(p[1]))
        })
        .collect()
}

fn tagged<S: Serialize>(kind: &str, v: &S) -> Value {
    let mut val = serde_json::to_value(v).unwrap_or(Value::Null);
    if let Value::Object(m) = &mut val {
        m.insert("kind".into(), Value::String(kind.into()));
    }
    val
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), fmt)
}

fn flow(cfg: &RunConfig, w: &mut Writer, header: Value) -> Result<Outcome, RunError> {
    let field = initial_field(cfg)?;
    w.csv("shape_initial.csv", &format!("# seed={}\ntheta,h,x,y", cfg.seed), shape_rows(&field))?;
    let fc = FlowConfig {
        s: cfg.s,
        t_end: cfg.t,
        dt: cfg.dt,
        c_cfl: cfg.c_cfl,
        record_every: cfg.record_every,
        perimeter_every: cfg.perimeter_every,
        snapshot_every: cfg.snapshot_every,
    };
    let trace = run(field, &fc)?;
    let hash = header["config_hash"].as_str().unwrap_or_default().to_string();
    let mut rows = vec![header];
    rows.extend(trace.records.iter().map(|r| tagged("step", r)));
    if let Some(h) = &trace.halt {
        rows.push(tagged("halt", h));
    }
    w.jsonl("trace.jsonl", rows)?;
    w.csv(
        "monitors.csv",
        &format!("# seed={}\nstep,t,sup_dev,sup_h,avg_h,dissipation,perimeter,slope_constant,c1s_norm,inradius,circumradius,v_mean,volume_drift_raw", cfg.seed),
        trace.records.iter().map(monitor_row),
    )?;
    if cfg.snapshot_every > 0 {
        let rows = trace.snapshots.iter().flat_map(|sn| {
            sn.h.iter().enumerate().map(move |(i, h)| {
                format!("{},{},{},{}", sn.step, fmt(sn.t), fmt(2.0 * PI * i as f64 / sn.h.len() as f64), fmt(*h))
            })
        });
        w.csv("snapshots.csv", &format!("# seed={}\nstep,t,theta,h", cfg.seed), rows)?;
    }
    w.csv(
        "shape_final.csv",
        &format!("# seed={}\ntheta,h,x,y", cfg.seed),
        shape_rows(&trace.final_state.field),
    )?;
    for c in ["convexity_preserved", "curvature_bound", "volume_weighted_mean", "volume_drift", "exponential_decay"] {
        w.check(c);
    }
    let fit = fit_exponential_rate(&trace.records, cfg.fit_window());
    let last = trace.records.last().expect("initial record");
    let (t0, t1) = cfg.fit_window();
    let (c, big_c, residual, points, fit_error) = match &fit {
        Ok(f) => (fmt(f.c), fmt(f.big_c), fmt(f.residual), f.points.to_string(), String::new()),
        Err(e) => (String::new(), String::new(), String::new(), String::new(), e.to_string().replace(',', ";")),
    };
    let row = [
        hash,
        cfg.seed.to_string(),
        trace.stats.steps.to_string(),
        fmt(last.t),
        trace.halt.is_some().to_string(),
        trace.halt.as_ref().map_or(String::new(), |h| h.code.to_string()),
        trace.stats.convex_every_step.to_string(),
        fmt(trace.stats.max_sup_h / trace.stats.initial_sup_h),
        fmt(trace.stats.max_abs_v_mean),
        fmt(trace.stats.max_abs_drift),
        fmt(last.monitors.sup_dev),
        fmt(t0),
        fmt(t1),
        c,
        big_c,
        residual,
        points,
        fit_error,
    ];
    w.csv(
        "summary.csv",
        "config_hash,seed,steps,t_final,halted,halt_code,convex_every_step,sup_h_ratio,max_abs_v_mean,max_abs_volume_drift,final_sup_dev,fit_t0,fit_t1,c,C,residual,fit_points,fit_error",
        std::iter::once(row.join(",")),
    )?;
    let code = if trace.halt.is_some() { EXIT_HALT } else { EXIT_OK };
    let text = match &trace.halt {
        Some(h) => format!("halted at step {} (t = {}): {}", h.step, h.t, h.message),
        None => format!(
            "{} steps to T = {}, sup|h-1| = {:e}, max sup H / initial = {:.6}",
            trace.stats.steps,
            cfg.t,
            last.monitors.sup_dev,
            trace.stats.max_sup_h / trace.stats.initial_sup_h
        ),
    };
    Ok(Outcome { exit_code: code, summary: text })
}

fn monitor_row(r: &FlowRecord) -> String {
    let m = &r.monitors;
    [
        r.step.to_string(),
        fmt(r.t),
        fmt(m.sup_dev),
        fmt(m.sup_h),
        fmt(m.avg_h),
        fmt(m.dissipation),
        opt(r.perimeter),
        fmt(m.slope_constant),
        fmt(m.c1s_norm),
        fmt(m.inradius),
        fmt(m.circumradius),
        fmt(r.v_mean),
        fmt(r.volume_drift_raw),
    ]
    .join(",")
}

#[derive(Serialize)]
struct MethodSummary {
    kind: &'static str,
    method: CurvatureMethod,
    average: f64,
    min: f64,
    max: f64,
    rel_std: f64,
    dissipation: f64,
}

fn curvature(cfg: &RunConfig, w: &mut Writer, header: Value) -> Result<Outcome, RunError> {
    let field = initial_field(cfg)?;
    let methods = cfg.method.methods();
    let mut cols = Vec::new();
    let mut rows = vec![header];
    for &m in &methods {
        let opts = CurvatureOptions { method: m, ..CurvatureOptions::default() };
        let sample = curvature_field_with(&field, cfg.s, &opts)?;
        let v = &sample.values;
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
        rows.push(serde_json::to_value(MethodSummary {
            kind: "method",
            method: m,
            average: sample.average,
            min: sample.min(),
            max: sample.max(),
            rel_std: sd / mean.abs(),
            dissipation: sample.dissipation,
        })
        .unwrap_or(Value::Null));
        cols.push(sample.values);
    }
    if cols.len() > 1 {
        let mut worst = 0.0f64;
        for c in &cols[1..] {
            for (a, b) in cols[0].iter().zip(c) {
                worst = worst.max((a / b - 1.0).abs());
            }
        }
        rows.push(json!({"kind": "cross_validation", "max_rel_diff": worst}));
        w.check("method_cross_validation");
    }
    let metrics = shape_metrics(&field, cfg.s);
    let perimeter = fractional_perimeter(&field, cfg.s)?;
    rows.push(json!({
        "kind": "shape",
        "area": metrics.area,
        "inradius": metrics.inradius,
        "circumradius": metrics.circumradius,
        "convex": metrics.convex,
        "slope_constant": metrics.slope_constant,
        "fractional_perimeter": perimeter,
    }));
    w.jsonl("curvature.jsonl", rows)?;
    let names: Vec<String> = methods.iter().map(|m| format!("H_{}", crate::config::MethodSel::One(*m))).collect();
    let table = (0..field.len()).map(|i| {
        let mut r = vec![i.to_string(), fmt(field.angle(i)), fmt(field.values()[i])];
        r.extend(cols.iter().map(|c| fmt(c[i])));
        r.join(",")
    });
    w.csv("curvature.csv", &format!("# seed={}\nnode,theta,h,{}", cfg.seed, names.join(",")), table)?;
    for c in ["alexandrov_constancy", "fractional_perimeter", "slope_constant"] {
        w.check(c);
    }
    Ok(Outcome {
        exit_code: EXIT_OK,
        summary: format!("H on {} nodes by {} method(s), P = {perimeter}", field.len(), methods.len()),
    })
}

fn spectral(cfg: &RunConfig, w: &mut Writer, header: Value) -> Result<Outcome, RunError> {
    let s = cfg.s;
    let n = cfg.n.min(256);
    let dt = cfg.dt.unwrap_or(1.0 / 512.0);
    let corpus = random_corpus(cfg.corpus, cfg.kmax.min(n / 4), cfg.seed);
    let opts = EvolveOptions { dt, norm_every: 0, alpha: cfg.alpha };
    let mut rows = vec![
        header,
        json!({"kind": "constants", "s": s, "c_s": c_s(s)?, "symbol_1d": symbol_1d(1.0, s)?}),
    ];
    let mut worst = 0.0f64;
    let mut history = Vec::new();
    for (i, g) in corpus.iter().enumerate() {
        let f: Vec<f64> = g.values(n);
        let out = evolve(SpectralState::new(n, s)?, &|_| f.clone(), &|_| 1.0, cfg.t, &opts)?;
        let rep = max_principle_check(&out.history, cfg.t);
        worst = worst.max(rep.ratio);
        rows.push(json!({"kind": "forcing", "index": i, "modes": g.modes, "max_principle_ratio": rep.ratio}));
        if i == 0 {
            history = out.history;
        }
    }
    let sch = schauder_constant(&|_| 1.0, s, cfg.alpha, cfg.t, &corpus, n, (cfg.t / dt).ceil() as usize)?;
    rows.push(json!({"kind": "schauder", "constant": sch.constant, "corpus_size": sch.corpus_size, "n": sch.n}));
    w.jsonl("spectral.jsonl", rows)?;
    w.csv(
        "spectral_history.csv",
        &format!("# seed={}\nt,sup_u,sup_f", cfg.seed),
        history.iter().map(|r| format!("{},{},{}", fmt(r.t), fmt(r.sup_u), fmt(r.sup_f))),
    )?;
    for c in ["maximum_principle", "schauder_estimate", "symbol_exactness"] {
        w.check(c);
    }
    Ok(Outcome {
        exit_code: EXIT_OK,
        summary: format!("max principle ratio {worst:.6}, Schauder constant {:.6}", sch.constant),
    })
}

fn norms(cfg: &RunConfig, w: &mut Writer, header: Value) -> Result<Outcome, RunError> {
    let n = cfg.n;
    let gamma = 1.0 + cfg.alpha;
    let mut funcs: Vec<(String, Vec<f64>)> = vec![("shape".into(), initial_field(cfg)?.values().to_vec())];
    for (i, g) in trig_corpus(cfg.corpus, 2, cfg.kmax, cfg.seed).iter().enumerate() {
        funcs.push((format!("corpus_{i}"), g.values(n)));
    }
    let mut rows = vec![header];
    let mut table = Vec::new();
    for (name, u) in &funcs {
        let semi = holder_seminorm(u, cfg.alpha);
        let ck = ck_beta_norm(u, 1, cfg.alpha)?;
        let lp = fourier_holder_norm(u, gamma)?;
        let interp = interpolation_check(u, cfg.alpha, 1.0 + cfg.s, 0.5).ok();
        rows.push(json!({
            "kind": "function",
            "name": name,
            "holder_seminorm": semi,
            "c1_alpha": ck,
            "fourier_holder": lp,
            "lp_ratio": lp / ck,
            "interpolation_ratio": interp,
        }));
        table.push(format!("{name},{},{},{},{},{}", fmt(semi), fmt(ck), fmt(lp), fmt(lp / ck), opt(interp)));
    }
    w.jsonl("norms.jsonl", rows)?;
    w.csv(
        "norms.csv",
        &format!("# seed={} alpha={} gamma={gamma}\nname,holder_seminorm,c1_alpha,fourier_holder,lp_ratio,interpolation_ratio", cfg.seed, cfg.alpha),
        table,
    )?;
    for c in ["littlewood_paley_equivalence", "interpolation_inequality"] {
        w.check(c);
    }
    Ok(Outcome { exit_code: EXIT_OK, summary: format!("{} functions", funcs.len()) })
}

fn verify(cfg: &RunConfig, w: &mut Writer, header: Value) -> Result<Outcome, RunError> {
    let results = run_suite(cfg.seed);
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.check).collect();
    let mut rows = vec![header];
    rows.extend(results.iter().map(|r| tagged("check", r)));
    w.jsonl("verify.jsonl", rows)?;
    for r in &results {
        w.check(r.check);
    }
    let code = if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED };
    let summary = if failed.is_empty() {
        format!("{} checks passed", results.len())
    } else {
        format!("{} of {} checks failed: {}", failed.len(), results.len(), failed.join(", "))
    };
    Ok(Outcome { exit_code: code, summary })
}
