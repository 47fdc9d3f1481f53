//! Discrete Hölder norms, Littlewood–Paley blocks and the Fourier
//! characterization of Hölder spaces on periodic grids.

use rayon::prelude::*;

use crate::error::{FlowError, Result};
use crate::fourier;
use crate::scalar::Real;

/// Distance between grid nodes i and j of an N-point periodic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric<T: Real> {
    /// Unit circle, nodes at θ_i = 2πi/N, chordal distance; derivatives in θ.
    Chordal,
    /// Torus [0, L), nodes at iL/N, periodic distance; derivatives in x.
    Periodic { length: T },
}

impl<T: Real> Metric<T> {
    pub fn distance(&self, i: usize, j: usize, n: usize) -> T {
        let d = (i as isize - j as isize).unsigned_abs();
        let d = d.min(n - d);
        match *self {
            Metric::Chordal => T::lit(2.0) * (T::PI() * T::idx(d) / T::idx(n)).sin(),
            Metric::Periodic { length } => length * T::idx(d) / T::idx(n),
        }
    }

    /// d/dx = scale · d/dθ for the grid parameter θ ∈ [0, 2π).
    fn derivative_scale(&self) -> T {
        match *self {
            Metric::Chordal => T::one(),
            Metric::Periodic { length } => T::TAU() / length,
        }
    }
}

fn sup<T: Real>(u: &[T]) -> T {
    u.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

/// max_{i≠j} |u_i − u_j| / d(i, j)^β, chordal distance.
pub fn holder_seminorm<T: Real>(u: &[T], beta: T) -> T {
    holder_seminorm_on(u, beta, &Metric::Chordal)
}

pub fn holder_seminorm_on<T: Real>(u: &[T], beta: T, metric: &Metric<T>) -> T {
    let n = u.len();
    // the distance only depends on |i − j|
    let dpow: Vec<T> = (0..n).map(|d| metric.distance(0, d, n).powf(beta)).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = T::zero();
            for j in (i + 1)..n {
                let q = (u[i] - u[j]).abs() / dpow[j - i];
                best = best.max(q);
            }
            best
        })
        .reduce(T::zero, T::max)
}

fn check_resolution<T: Real>(u: &[T]) -> Result<()> {
    let e = fourier::energy_above(u, u.len() / 4);
    if e > T::lit(1e-8) {
        return Err(FlowError::Resolution(format!(
            "energy fraction {e:e} above N/4 exceeds 1e-8"
        )));
    }
    Ok(())
}

/// Σ_{l≤k} sup|u^{(l)}| + [u^{(k)}]_β (the seminorm is dropped at β = 0).
pub fn ck_beta_norm<T: Real>(u: &[T], k: u32, beta: T) -> Result<T> {
    ck_beta_norm_on(u, k, beta, &Metric::Chordal)
}

pub fn ck_beta_norm_on<T: Real>(u: &[T], k: u32, beta: T, metric: &Metric<T>) -> Result<T> {
    if !(beta >= T::zero() && beta < T::one()) {
        return Err(FlowError::Domain(format!("β = {beta} must lie in [0, 1)")));
    }
    check_resolution(u)?;
    Ok(ck_beta_unchecked(u, k, beta, metric))
}

pub(crate) fn ck_beta_unchecked<T: Real>(u: &[T], k: u32, beta: T, metric: &Metric<T>) -> T {
    let scale = metric.derivative_scale();
    let mut total = sup(u);
    let mut top = u.to_vec();
    for l in 1..=k {
        top = fourier::derivative(u, l);
        let sc = scale.powi(l as i32);
        top.iter_mut().for_each(|v| *v = *v * sc);
        total = total + sup(&top);
    }
    if beta > T::zero() {
        total = total + holder_seminorm_on(&top, beta, metric);
    }
    total
}

/// ‖u‖_{C^σ} for real σ ≥ 0 as C^{⌊σ⌋ + frac(σ)}.
pub fn c_sigma_norm<T: Real>(u: &[T], sigma: T) -> Result<T> {
    let k = sigma.floor();
    ck_beta_norm(u, k.to_u32().unwrap_or(0), sigma - k)
}

/// Quintic smoothstep cutoff: 1 on [0, 1], 0 on [2, ∞).
pub fn eta(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let t = r - 1.0;
        1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// δ(ξ) = η(|ξ|) − η(2|ξ|), supported in 1/2 < |ξ| < 2.
pub fn delta(xi: f64) -> f64 {
    eta(xi.abs()) - eta(2.0 * xi.abs())
}

/// Δ_j u: multiplication by δ(2^{-j}|k|) in frequency.
pub fn paley_block<T: Real>(u: &[T], j: u32) -> Vec<T> {
    let scale = 0.5f64.powi(j as i32);
    fourier::filter(u, |k| T::lit(delta(k as f64 * scale)))
}

#[derive(Debug, Clone)]
pub struct PaleyBlocks<T: Real> {
    pub blocks: Vec<Vec<T>>,
    pub j_range: std::ops::RangeInclusive<u32>,
}

impl<T: Real> PaleyBlocks<T> {
    /// Blocks j = 0..=log2(N) − 1, enough to cover every |k| ≤ N/2.
    pub fn new(u: &[T]) -> Self {
        let top = u.len().trailing_zeros().saturating_sub(1);
        let j_range = 0..=top;
        let blocks = j_range.clone().map(|j| paley_block(u, j)).collect();
        Self { blocks, j_range }
    }

    pub fn reconstruct(&self) -> Vec<T> {
        let n = self.blocks.first().map_or(0, |b| b.len());
        let mut out = vec![T::zero(); n];
        for b in &self.blocks {
            for (o, v) in out.iter_mut().zip(b) {
                *o = *o + *v;
            }
        }
        out
    }

    pub fn eta(r: f64) -> f64 {
        eta(r)
    }
}

/// sup_{j≥1} 2^{jγ}‖Δ_j u‖_∞ for non-integer γ ∈ (0, 2).
pub fn fourier_holder_norm<T: Real>(u: &[T], gamma: T) -> Result<T> {
    if !(gamma > T::zero() && gamma < T::lit(2.0)) || gamma == T::one() {
        return Err(FlowError::Domain(format!("γ = {gamma} must be non-integer in (0, 2)")));
    }
    let top = u.len().trailing_zeros().saturating_sub(1);
    Ok((1..=top)
        .map(|j| T::lit(2.0).powf(T::idx(j as usize) * gamma) * sup(&paley_block(u, j)))
        .fold(T::zero(), T::max))
}

/// ‖u‖_{C^σ} / (‖u‖_{C^{s1}}^θ ‖u‖_{C^{s2}}^{1−θ}), σ = θs1 + (1−θ)s2.
pub fn interpolation_check<T: Real>(u: &[T], s1: T, s2: T, theta: T) -> Result<T> {
    if !(theta > T::zero() && theta < T::one()) || s1 < T::zero() || s2 < T::zero() {
        return Err(FlowError::Domain("need θ ∈ (0,1) and s1, s2 ≥ 0".into()));
    }
    let sigma = theta * s1 + (T::one() - theta) * s2;
    let num = c_sigma_norm(u, sigma)?;
    let den = c_sigma_norm(u, s1)?.powf(theta) * c_sigma_norm(u, s2)?.powf(T::one() - theta);
    if !(den > T::zero()) {
        return Err(FlowError::Degenerate("zero function has no interpolation ratio".into()));
    }
    Ok(num / den)
}
