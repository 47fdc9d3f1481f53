//! Run configuration: `key=value` text or one JSON object, merged with
//! command-line overrides and validated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fracflow_core::curvature::CurvatureMethod;
use fracflow_core::shapes::Shape;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Flow,
    Curvature,
    Spectral,
    Norms,
    Verify,
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Subcommand::Flow => "flow",
            Subcommand::Curvature => "curvature",
            Subcommand::Spectral => "spectral",
            Subcommand::Norms => "norms",
            Subcommand::Verify => "verify",
        };
        f.write_str(name)
    }
}

impl FromStr for Subcommand {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "flow" => Subcommand::Flow,
            "curvature" => Subcommand::Curvature,
            "spectral" => Subcommand::Spectral,
            "norms" => Subcommand::Norms,
            "verify" => Subcommand::Verify,
            _ => return Err(ConfigError::new("subcommand", format!("unknown subcommand '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self { key: key.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in '{}': {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Curvature methods to run; `All` adds the principal-value oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSel {
    One(CurvatureMethod),
    All,
}

impl MethodSel {
    pub fn methods(self) -> Vec<CurvatureMethod> {
        match self {
            MethodSel::One(m) => vec![m],
            MethodSel::All => vec![
                CurvatureMethod::ChordQuadrature,
                CurvatureMethod::BoundaryIntegral,
                CurvatureMethod::PvOracle,
            ],
        }
    }
}

impl fmt::Display for MethodSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSel::All => f.write_str("all"),
            MethodSel::One(CurvatureMethod::ChordQuadrature) => f.write_str("chord"),
            MethodSel::One(CurvatureMethod::BoundaryIntegral) => f.write_str("boundary"),
            MethodSel::One(CurvatureMethod::PvOracle) => f.write_str("pv"),
        }
    }
}

pub const KEYS: &[(&str, &str, &str)] = &[
    ("subcommand", "", "flow | curvature | spectral | norms | verify"),
    ("s", "0.5", "fractional order, 0 < s < 1"),
    ("alpha", "min(s,1-s)/2", "Hölder exponent, 0 < alpha < min(s, 1-s)"),
    ("N", "256", "grid size, power of two in [16, 4096]"),
    ("T", "1", "time horizon"),
    ("dt", "auto", "fixed time step; auto re-evaluates the stability rule each step"),
    ("c_cfl", "1.5", "stability factor for the automatic time step"),
    ("shape", "ellipse:1.3", "circle:r | ellipse:a | shifted:d | polygon:m | random:K | file:path"),
    ("seed", "0", "seed for every random choice"),
    ("output_dir", "out", "directory for artifacts"),
    ("method", "chord", "chord | boundary | pv | all"),
    ("record_every", "50", "flow steps between trace records"),
    ("perimeter_every", "50", "flow steps between fractional perimeter evaluations"),
    ("snapshot_every", "500", "flow steps between snapshots of h, 0 for none"),
    ("fit_window", "T/4:T", "time window t0:t1 of the decay-rate fit"),
    ("corpus", "20", "size of the random function corpus"),
    ("kmax", "min(12,N/4)", "highest mode in the random corpus"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Option<Subcommand>,
    pub s: f64,
    pub alpha: f64,
    pub n: usize,
    pub t: f64,
    pub dt: Option<f64>,
    pub c_cfl: f64,
    pub shape: Shape,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub method: MethodSel,
    pub record_every: usize,
    pub perimeter_every: usize,
    pub snapshot_every: usize,
    pub fit_window: Option<(f64, f64)>,
    pub corpus: usize,
    pub kmax: usize,
}

impl RunConfig {
    pub fn fit_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((self.t / 4.0, self.t))
    }

    /// Canonical key=value form, also recorded in the artifacts.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        if let Some(sc) = self.subcommand {
            m.insert("subcommand".into(), sc.to_string());
        }
        m.insert("s".into(), self.s.to_string());
        m.insert("alpha".into(), self.alpha.to_string());
        m.insert("N".into(), self.n.to_string());
        m.insert("T".into(), self.t.to_string());
        m.insert("dt".into(), self.dt.map_or("auto".into(), |d| d.to_string()));
        m.insert("c_cfl".into(), self.c_cfl.to_string());
        m.insert("shape".into(), self.shape.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("output_dir".into(), self.output_dir.display().to_string());
        m.insert("method".into(), self.method.to_string());
        m.insert("record_every".into(), self.record_every.to_string());
        m.insert("perimeter_every".into(), self.perimeter_every.to_string());
        m.insert("snapshot_every".into(), self.snapshot_every.to_string());
        let (a, b) = self.fit_window();
        m.insert("fit_window".into(), format!("{a}:{b}"));
        m.insert("corpus".into(), self.corpus.to_string());
        m.insert("kmax".into(), self.kmax.to_string());
        m
    }
}

fn canonical_key(k: &str) -> Option<&'static str> {
    let k = match k {
        "n" => "N",
        "t" | "horizon" => "T",
        "output" | "out" => "output_dir",
        other => other,
    };
    KEYS.iter().map(|e| e.0).find(|&name| name == k)
}

/// Parse `key=value` tokens (whitespace or newline separated, `#` comments)
/// or a single JSON object into raw pairs. Unknown keys are rejected.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let trimmed = text.trim();
    let mut out = BTreeMap::new();
    if trimmed.starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(trimmed).map_err(|e| ConfigError::new("json", e.to_string()))?;
        let obj = v.as_object().ok_or_else(|| ConfigError::new("json", "expected an object"))?;
        for (k, v) in obj {
            let key = canonical_key(k).ok_or_else(|| ConfigError::new(k, "unknown key"))?;
            let val = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::Null => "auto".into(),
                _ => return Err(ConfigError::new(k, "expected a scalar value")),
            };
            out.insert(key.to_string(), val);
        }
        return Ok(out);
    }
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| ConfigError::new(tok, "expected key=value"))?;
            let key = canonical_key(k.trim()).ok_or_else(|| ConfigError::new(k, "unknown key"))?;
            out.insert(key.to_string(), v.trim().to_string());
        }
    }
    Ok(out)
}

fn num<T: FromStr>(pairs: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    match pairs.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| ConfigError::new(key, format!("cannot parse '{v}'"))),
    }
}

/// Validate raw pairs into a config, filling defaults.
pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    for k in pairs.keys() {
        if canonical_key(k) != Some(k.as_str()) {
            return Err(ConfigError::new(k, "unknown key"));
        }
    }
    let subcommand = pairs.get("subcommand").map(|v| v.parse()).transpose()?;
    let s: f64 = num(pairs, "s")?.unwrap_or(0.5);
    if !(s > 0.0 && s < 1.0) {
        return Err(ConfigError::new("s", format!("s = {s} must lie in (0, 1)")));
    }
    let bound = s.min(1.0 - s);
    let alpha: f64 = num(pairs, "alpha")?.unwrap_or(bound / 2.0);
    if !(alpha > 0.0 && alpha < bound) {
        return Err(ConfigError::new("alpha", format!("alpha = {alpha} must lie in (0, {bound})")));
    }
    let n: usize = num(pairs, "N")?.unwrap_or(256);
    if !(n.is_power_of_two() && (16..=4096).contains(&n)) {
        return Err(ConfigError::new("N", format!("N = {n} must be a power of two in [16, 4096]")));
    }
    let t: f64 = num(pairs, "T")?.unwrap_or(1.0);
    if !(t > 0.0 && t.is_finite()) {
        return Err(ConfigError::new("T", "horizon must be positive"));
    }
    let dt = match pairs.get("dt").map(String::as_str) {
        None | Some("auto") => None,
        Some(_) => {
            let d: f64 = num(pairs, "dt")?.unwrap();
            if !(d > 0.0 && d.is_finite()) {
                return Err(ConfigError::new("dt", "time step must be positive"));
            }
            Some(d)
        }
    };
    let c_cfl: f64 = num(pairs, "c_cfl")?.unwrap_or(1.5);
    if !(c_cfl > 0.0 && c_cfl.is_finite()) {
        return Err(ConfigError::new("c_cfl", "must be positive"));
    }
    let shape = match pairs.get("shape") {
        None => Shape::Ellipse(1.3),
        Some(v) => v.parse().map_err(|e: fracflow_core::FlowError| ConfigError::new("shape", e.to_string()))?,
    };
    let seed: u64 = num(pairs, "seed")?.unwrap_or(0);
    let output_dir = PathBuf::from(pairs.get("output_dir").map_or("out", String::as_str));
    let method = match pairs.get("method").map(String::as_str) {
        None => MethodSel::One(CurvatureMethod::ChordQuadrature),
        Some("all") => MethodSel::All,
        Some(m) => MethodSel::One(m.parse().map_err(|_| ConfigError::new("method", format!("unknown method '{m}'")))?),
    };
    let record_every: usize = num(pairs, "record_every")?.unwrap_or(50);
    let perimeter_every: usize = num(pairs, "perimeter_every")?.unwrap_or(50);
    let snapshot_every: usize = num(pairs, "snapshot_every")?.unwrap_or(500);
    if record_every == 0 || perimeter_every == 0 {
        return Err(ConfigError::new("record_every", "intervals must be at least 1"));
    }
    let fit_window = match pairs.get("fit_window") {
        None => None,
        Some(v) => {
            let bad = || ConfigError::new("fit_window", format!("expected t0:t1, got '{v}'"));
            let (a, b) = v.split_once(':').ok_or_else(bad)?;
            let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if !(a >= 0.0 && b > a) {
                return Err(bad());
            }
            Some((a, b))
        }
    };
    let corpus: usize = num(pairs, "corpus")?.unwrap_or(20);
    let kmax: usize = num(pairs, "kmax")?.unwrap_or(12.min(n / 4));
    if corpus == 0 {
        return Err(ConfigError::new("corpus", "must be at least 1"));
    }
    if !(1..=n / 4).contains(&kmax) {
        return Err(ConfigError::new("kmax", format!("must lie in [1, N/4 = {}]", n / 4)));
    }
    Ok(RunConfig {
        subcommand,
        s,
        alpha,
        n,
        t,
        dt,
        c_cfl,
        shape,
        seed,
        output_dir,
        method,
        record_every,
        perimeter_every,
        snapshot_every,
        fit_window,
        corpus,
        kmax,
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    from_pairs(&parse_pairs(text)?)
}

/// Merge layers in increasing precedence: defaults < file < overrides.
pub fn merge(file: Option<&str>, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let mut pairs = match file {
        Some(text) => parse_pairs(text)?,
        None => BTreeMap::new(),
    };
    for (k, v) in overrides {
        let key = canonical_key(k).ok_or_else(|| ConfigError::new(k, "unknown key"))?;
        pairs.insert(key.to_string(), v.clone());
    }
    from_pairs(&pairs)
}

/// Defaults table for `--help`.
pub fn help_table() -> String {
    let mut s = String::from("Configuration keys (flags > config file > defaults):\n");
    for (k, d, what) in KEYS {
        let d = if d.is_empty() { "-" } else { d };
        s.push_str(&format!("  {k:<16} default {d:<14} {what}\n"));
    }
    s
}
