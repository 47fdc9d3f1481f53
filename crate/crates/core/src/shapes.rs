//! Initial shapes for the flow and the test corpora.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FlowError, Result};
use crate::geometry::{min_curvature, read_csv, rescale_and_center, HeightField};
use crate::roots::brent;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Circle(f64),
    /// Semi-axes a and 1/a, so the area is π.
    Ellipse(f64),
    /// Circle of unit radius whose center sits at (d, 0).
    ShiftedCircle(f64),
    /// Regular m-gon with its support function Fourier-truncated.
    Polygon(usize),
    /// Seeded 1 + Σ_{k=2}^{K} ε_k cos(kθ + φ_k).
    Random(usize),
    File(PathBuf),
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Circle(r) => write!(f, "circle:{r}"),
            Shape::Ellipse(a) => write!(f, "ellipse:{a}"),
            Shape::ShiftedCircle(d) => write!(f, "shifted:{d}"),
            Shape::Polygon(m) => write!(f, "polygon:{m}"),
            Shape::Random(k) => write!(f, "random:{k}"),
            Shape::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for Shape {
    type Err = FlowError;

    fn from_str(text: &str) -> Result<Self> {
        let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
        let num = |default: f64| -> Result<f64> {
            if arg.is_empty() {
                Ok(default)
            } else {
                arg.parse::<f64>()
                    .map_err(|_| FlowError::Domain(format!("bad shape parameter '{arg}'")))
            }
        };
        let shape = match kind {
            "circle" => Shape::Circle(num(1.0)?),
            "ellipse" => Shape::Ellipse(num(1.3)?),
            "shifted" => Shape::ShiftedCircle(num(0.3)?),
            "polygon" => Shape::Polygon(num(5.0)? as usize),
            "random" => Shape::Random(num(6.0)? as usize),
            "file" if !arg.is_empty() => Shape::File(PathBuf::from(arg)),
            _ => return Err(FlowError::Domain(format!("unknown shape '{text}'"))),
        };
        match shape {
            Shape::Circle(r) | Shape::Ellipse(r) if !(r > 0.0) => {
                Err(FlowError::Domain(format!("shape parameter must be > 0 in '{text}'")))
            }
            Shape::ShiftedCircle(d) if !(d.abs() < 1.0) => {
                Err(FlowError::Domain("shift must be < 1".into()))
            }
            Shape::Polygon(m) if m < 3 => Err(FlowError::Domain("polygon needs m >= 3".into())),
            Shape::Random(k) if k < 2 => Err(FlowError::Domain("random needs K >= 2".into())),
            s => Ok(s),
        }
    }
}

impl Shape {
    pub fn build<T: Real>(&self, n: usize, seed: u64) -> Result<HeightField<T>> {
        match self {
            Shape::Circle(r) => HeightField::constant(n, T::lit(*r)),
            Shape::Ellipse(a) => ellipse(n, T::lit(*a), T::lit(1.0 / a)),
            Shape::ShiftedCircle(d) => shifted_circle(n, T::lit(*d)),
            Shape::Polygon(m) => smoothed_polygon(n, *m, 4),
            Shape::Random(k) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_convex(n, *k, &mut rng)
            }
            Shape::File(p) => {
                let f = std::fs::File::open(p)
                    .map_err(|e| FlowError::Domain(format!("{}: {e}", p.display())))?;
                read_csv(std::io::BufReader::new(f))
            }
        }
    }
}

/// Radial function ab/√(b²cos²θ + a²sin²θ).
pub fn ellipse<T: Real>(n: usize, a: T, b: T) -> Result<HeightField<T>> {
    HeightField::from_fn(n, |t: T| a * b / (b * b * t.cos().powi(2) + a * a * t.sin().powi(2)).sqrt())
}

pub fn shifted_circle<T: Real>(n: usize, d: T) -> Result<HeightField<T>> {
    HeightField::from_fn(n, |t: T| d * t.cos() + (T::one() - d * d * t.sin().powi(2)).sqrt())
}

/// Fejér-weighted truncation of the support function keeps p + p'' ≥ 0,
/// so the smoothed polygon stays convex.
pub fn smoothed_polygon<T: Real>(n: usize, m: usize, terms: usize) -> Result<HeightField<T>> {
    let mf = m as f64;
    let a = std::f64::consts::PI / mf;
    let mut coef = vec![mf / std::f64::consts::PI * a.sin()];
    for l in 1..=terms {
        let big = (l * m) as f64;
        let c = mf / std::f64::consts::PI
            * (((big - 1.0) * a).sin() / (big - 1.0) + ((big + 1.0) * a).sin() / (big + 1.0));
        coef.push(c * (1.0 - l as f64 / (terms as f64 + 1.0)));
    }
    let support = |psi: f64| -> (f64, f64) {
        let mut p = coef[0];
        let mut dp = 0.0;
        for (l, c) in coef.iter().enumerate().skip(1) {
            let w = (l * m) as f64;
            p += c * (w * psi).cos();
            dp -= c * w * (w * psi).sin();
        }
        (p, dp)
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let th = std::f64::consts::TAU * i as f64 / n as f64;
        let g = |psi: f64| {
            let (p, dp) = support(psi);
            psi + (dp / p).atan() - th
        };
        let (lo, hi) = (th - half_pi, th + half_pi);
        let psi = brent(g, lo, hi, g(lo), g(hi), 1e-15, 200)
            .ok_or_else(|| FlowError::Geometry("support-function inversion failed".into()))?;
        let (p, dp) = support(psi);
        vals.push(T::lit(p.hypot(dp)));
    }
    rescale_and_center(&HeightField::new(vals)?, T::PI())
}

/// Seeded smooth convex perturbation of the unit circle with
/// Σ k²ε_k ≤ 0.5, then normalized to area π. Modes start at k = 2 since
/// k = 1 is a translation.
pub fn random_convex<T: Real>(n: usize, kmax: usize, rng: &mut impl Rng) -> Result<HeightField<T>> {
    let kmax = kmax.min(n / 4);
    let budget = rng.gen_range(0.1..0.5);
    let raw: Vec<(f64, f64)> = (2..=kmax)
        .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let weight: f64 = raw.iter().enumerate().map(|(i, (u, _))| ((i + 2) as f64).powi(2) * u).sum();
    let scale = budget / weight.max(1e-300);
    let mut field = HeightField::from_fn(n, |t: T| {
        let mut h = 1.0;
        let tf = t.f64();
        for (i, (u, ph)) in raw.iter().enumerate() {
            let k = (i + 2) as f64;
            h += scale * u * (k * tf + ph).cos();
        }
        T::lit(h)
    })?;
    field = rescale_and_center(&field, T::PI())?;
    if min_curvature(&field) <= T::lit(0.1) {
        return Err(FlowError::Geometry("random field failed the curvature margin".into()));
    }
    Ok(field)
}
