use std::fs;
use std::path::Path;
use std::process::Command;

use sha2::{Digest, Sha256};

use fracflow_cli::commands::{EXIT_CONFIG, EXIT_HALT, EXIT_MODULE, EXIT_OK};
use fracflow_cli::config::MethodSel;
use fracflow_cli::{merge, parse_config, run_subcommand, RunConfig, Subcommand};
use fracflow_core::shapes::Shape;

fn small(dir: &Path, text: &str) -> RunConfig {
    let mut c = parse_config(text).unwrap();
    c.output_dir = dir.to_path_buf();
    c
}

#[test]
fn config_examples() {
    let c = parse_config("s=0.5 N=256 shape=ellipse:1.3 T=20").unwrap();
    assert_eq!((c.s, c.n, c.t), (0.5, 256, 20.0));
    assert_eq!(c.shape, Shape::Ellipse(1.3));
    assert_eq!(parse_config("s=1.2").unwrap_err().key, "s");
    assert_eq!(parse_config("alpha=0.6 s=0.5").unwrap_err().key, "alpha");
    assert_eq!(parse_config("s=0.5 wobble=3").unwrap_err().key, "wobble");
    assert_eq!(parse_config("N=100").unwrap_err().key, "N");
    assert_eq!(parse_config("N=8192").unwrap_err().key, "N");
    assert_eq!(parse_config("dt=-1").unwrap_err().key, "dt");
    assert_eq!(parse_config("shape=blob").unwrap_err().key, "shape");
}

#[test]
fn json_and_comments() {
    let a = parse_config(r#"{"s": 0.3, "N": 64, "shape": "circle:2", "dt": null, "method": "all"}"#).unwrap();
    let b = parse_config("# lab setup\ns=0.3\nN=64 shape=circle:2 # radius two\nmethod=all").unwrap();
    assert_eq!(a, b);
    assert_eq!(a.method, MethodSel::All);
    assert!(parse_config(r#"{"s": [1]}"#).is_err());
    assert!(parse_config(r#"{"sigma": 1}"#).is_err());
    assert!(parse_config("s0.3").is_err());
}

#[test]
fn defaults_and_precedence() {
    let d = parse_config("").unwrap();
    assert_eq!((d.s, d.n, d.seed), (0.5, 256, 0));
    assert!(d.alpha > 0.0 && d.alpha < 0.5);
    assert_eq!(parse_config("s=0.1").unwrap().alpha, 0.05);
    let file = "s=0.3 N=64 seed=7";
    let c = merge(Some(file), &[("s".into(), "0.4".into())]).unwrap();
    assert_eq!((c.s, c.n, c.seed), (0.4, 64, 7));
    assert!(merge(Some(file), &[("bogus".into(), "1".into())]).is_err());
    let round = parse_config(
        &c.to_pairs().iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join("\n"),
    )
    .unwrap();
    assert_eq!(round.s, c.s);
    assert_eq!(round.fit_window(), c.fit_window());
}

fn manifest_matches(dir: &Path) -> serde_json::Value {
    let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    for a in m["artifacts"].as_array().unwrap() {
        let bytes = fs::read(dir.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(a["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    assert!(!m["checks"].as_array().unwrap().is_empty());
    m
}

#[test]
fn flow_artifacts_parse_and_repeat() {
    let t1 = tempfile::tempdir().unwrap();
    let t2 = tempfile::tempdir().unwrap();
    let text = "s=0.5 N=64 T=0.3 shape=ellipse:1.3 record_every=10 snapshot_every=20";
    for t in [&t1, &t2] {
        let o = run_subcommand(&small(t.path(), text), Subcommand::Flow).unwrap();
        assert_eq!(o.exit_code, EXIT_OK);
    }
    let trace = fs::read_to_string(t1.path().join("trace.jsonl")).unwrap();
    let rows: Vec<serde_json::Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows[0]["kind"], "config");
    assert_eq!(rows[0]["seed"], 0);
    assert!(rows[1..].iter().all(|r| r["kind"] == "step" && r["convex"] == true));
    let summary = fs::read_to_string(t1.path().join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[0].split(',').collect();
    let vals: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols.len(), vals.len());
    let get = |k: &str| vals[cols.iter().position(|c| *c == k).unwrap()];
    assert_eq!(get("convex_every_step"), "true");
    assert_eq!(get("config_hash"), rows[0]["config_hash"].as_str().unwrap());
    assert_eq!(get("config_hash").len(), 64);
    let snaps = fs::read_to_string(t1.path().join("snapshots.csv")).unwrap();
    let steps: std::collections::BTreeSet<u64> =
        snaps.lines().skip(2).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(!steps.is_empty() && steps.iter().all(|s| s % 20 == 0));
    assert_eq!(snaps.lines().count() - 2, 64 * steps.len());
    for name in ["trace.jsonl", "summary.csv", "monitors.csv", "shape_initial.csv", "shape_final.csv", "snapshots.csv"] {
        assert_eq!(fs::read(t1.path().join(name)).unwrap(), fs::read(t2.path().join(name)).unwrap(), "{name}");
    }
    let m = manifest_matches(t1.path());
    assert_eq!(m["subcommand"], "flow");
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 6);
}

#[test]
fn halt_is_reported() {
    let t = tempfile::tempdir().unwrap();
    let o = run_subcommand(&small(t.path(), "N=64 T=1 dt=0.5 shape=ellipse:2"), Subcommand::Flow).unwrap();
    assert_eq!(o.exit_code, EXIT_HALT);
    let trace = fs::read_to_string(t.path().join("trace.jsonl")).unwrap();
    let last: serde_json::Value = serde_json::from_str(trace.lines().last().unwrap()).unwrap();
    assert_eq!(last["kind"], "halt");
    assert!(last["code"].as_str().is_some());
    manifest_matches(t.path());
}

#[test]
fn other_subcommands() {
    for (sub, text, file) in [
        (Subcommand::Curvature, "N=32 method=all shape=random:4 seed=2", "curvature.csv"),
        (Subcommand::Spectral, "N=32 T=0.5 corpus=4 kmax=6", "spectral.jsonl"),
        (Subcommand::Norms, "N=64 corpus=5", "norms.csv"),
    ] {
        let t = tempfile::tempdir().unwrap();
        let o = run_subcommand(&small(t.path(), text), sub).unwrap();
        assert_eq!(o.exit_code, EXIT_OK);
        assert!(t.path().join(file).exists());
        manifest_matches(t.path());
    }
}

#[test]
fn binary_reports_config_errors() {
    let t = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fracflow"))
        .args(["flow", "-s", "1.5", "-o"])
        .arg(t.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config:s");

    let cfg = t.path().join("run.cfg");
    fs::write(&cfg, "subcommand=norms\nN=32").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fracflow"))
        .args(["flow", "-c"])
        .arg(&cfg)
        .args(["-o"])
        .arg(t.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));

    // the default ellipse is under-resolved at N = 32
    let out = Command::new(env!("CARGO_BIN_EXE_fracflow"))
        .args(["norms", "-c"])
        .arg(&cfg)
        .args(["-o"])
        .arg(t.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_MODULE));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "resolution");

    let out = Command::new(env!("CARGO_BIN_EXE_fracflow"))
        .args(["norms", "-c"])
        .arg(&cfg)
        .args(["-n", "128", "--threads", "1", "-o"])
        .arg(t.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(t.path().join("norms.jsonl").exists());
}
