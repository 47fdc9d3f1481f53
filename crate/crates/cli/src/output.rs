//! Artifact writing and the manifest. Only the manifest carries wall-clock
//! time, so everything else is a pure function of (config, seed).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: String,
    seed: u64,
    config: &'a std::collections::BTreeMap<String, String>,
    checks: &'a [String],
    artifacts: &'a [Artifact],
    exit_code: i32,
    started_unix: f64,
    finished_unix: f64,
}

pub struct Writer {
    dir: PathBuf,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<String>,
    started: f64,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl Writer {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), artifacts: Vec::new(), checks: Vec::new(), started: now() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn jsonl<S: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = S>) -> std::io::Result<()> {
        let mut buf = Vec::new();
        for r in rows {
            serde_json::to_writer(&mut buf, &r)?;
            buf.push(b'\n');
        }
        self.write(name, &buf)
    }

    pub fn csv(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> std::io::Result<()> {
        let mut buf = Vec::new();
        writeln!(buf, "{header}")?;
        for r in rows {
            writeln!(buf, "{r}")?;
        }
        self.write(name, &buf)
    }

    pub fn check(&mut self, name: &str) {
        if !self.checks.iter().any(|c| c == name) {
            self.checks.push(name.to_string());
        }
    }

    pub fn finish(
        self,
        subcommand: &str,
        seed: u64,
        config: &std::collections::BTreeMap<String, String>,
        exit_code: i32,
    ) -> std::io::Result<PathBuf> {
        let m = Manifest {
            tool: "fracflow",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            seed,
            config,
            checks: &self.checks,
            artifacts: &self.artifacts,
            exit_code,
            started_unix: self.started,
            finished_unix: now(),
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_vec_pretty(&m)?)?;
        Ok(path)
    }
}

/// Shortest round-trip representation, stable across runs.
pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}
