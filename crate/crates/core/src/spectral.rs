//! Fourier-symbol solver for ∂_t u = L_{A(t)} u + f on the unit torus,
//! L_A u(x) = ∫_ℝ (u(x+z) − u(x)) / (A z²)^{(2+s)/2} dz.
//!
//! With û_k the coefficient of e^{2πikx}, L_A acts as −a|k|^{1+s} where
//! a = 2c_s A^{-(2+s)/2} and c_s = ∫_0^∞ (1 − cos 2πr) r^{-2-s} dr.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::fourier::{self, wavenumber};
use crate::kernels::Matrix;
use crate::norms::{ck_beta_norm_on, Metric};
use crate::quadrature::{gauss_jacobi, gauss_legendre, punctured_correction};
use crate::scalar::Real;

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(FlowError::Domain(format!("s = {s} must lie in (0, 1)")))
    }
}

/// Series of 1 − cos on (0, 1], Gauss–Legendre per period on [1, R], and
/// the integrated-by-parts asymptotic tail beyond R.
pub fn c_s_series_split(s: f64) -> f64 {
    let tp = std::f64::consts::TAU;
    let mut head = 0.0;
    let mut term = 1.0; // (2π)^{2m}/(2m)!
    for m in 1..60 {
        let mf = m as f64;
        term *= tp * tp / ((2.0 * mf - 1.0) * (2.0 * mf));
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        head += sign * term / (2.0 * mf - 1.0 - s);
    }
    let r = 64usize;
    let gl = gauss_legendre(24);
    let body: f64 = (1..r)
        .map(|k| gl.integrate_on(k as f64, k as f64 + 1.0, |x| (1.0 - (tp * x).cos()) * x.powf(-2.0 - s)))
        .sum();
    let rf = r as f64;
    let p = 2.0 + s;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let tail = rf.powf(-1.0 - s) / (1.0 + s)
        - (p / (4.0 * pi2) * rf.powf(-p - 1.0) - p * (p + 1.0) * (p + 2.0) / (16.0 * pi2 * pi2) * rf.powf(-p - 3.0));
    head + body + tail
}

/// Gauss–Jacobi with weight r^{-s} on (0, 1]; on [1, ∞) the exact
/// ∫r^{-2-s} minus the cosine part integrated by parts twice, leaving an
/// r^{-4-s} oscillatory integral summed per half period.
pub fn c_s_graded(s: f64) -> f64 {
    let tp = std::f64::consts::TAU;
    let gj = gauss_jacobi(48, 0.0, -s);
    // r = (1+u)/2, r^{-s} = 2^s (1+u)^{-s}, dr = du/2
    let head = gj.integrate(|u| {
        let r = 0.5 * (1.0 + u);
        let f = if r < 1e-4 {
            let x = tp * r;
            tp * tp * (0.5 - x * x / 24.0 + x.powi(4) / 720.0)
        } else {
            (1.0 - (tp * r).cos()) / (r * r)
        };
        f * 2f64.powf(s) * 0.5
    });
    let p = 2.0 + s;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let gl = gauss_legendre(16);
    let upper = 512usize;
    let rest: f64 = (2..2 * upper)
        .map(|k| {
            let (a, b) = (0.5 * k as f64, 0.5 * (k + 1) as f64);
            gl.integrate_on(a, b, |x| (tp * x).cos() * x.powf(-p - 2.0))
        })
        .sum();
    let cos_part = p / (4.0 * pi2) - p * (p + 1.0) / (4.0 * pi2) * rest;
    head + 1.0 / (1.0 + s) - cos_part
}

/// c_s, cached per s.
pub fn c_s(s: f64) -> Result<f64> {
    check_s(s)?;
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&s.to_bits()) {
        return Ok(v);
    }
    let v = c_s_series_split(s);
    cache.lock().unwrap().insert(s.to_bits(), v);
    Ok(v)
}

/// a(ξ) = c_s ∫_{S^{n-1}} |⟨ω, ξ/|ξ|⟩|^{1+s} / ‖ω‖_A^{n+1+s} dω for n ≤ 2;
/// S⁰ = {±1} with counting measure.
pub fn compute_symbol<T: Real>(a: &Matrix<T>, s: T, direction: &[T]) -> Result<T> {
    let cs = T::lit(c_s(s.f64())?);
    let n = a.rows;
    if a.cols != n || direction.len() != n {
        return Err(FlowError::Size("matrix and direction dimensions differ".into()));
    }
    if !a.is_spd() {
        return Err(FlowError::Domain("symbol needs a symmetric positive definite matrix".into()));
    }
    let len = direction.iter().map(|&v| v * v).sum::<T>().sqrt();
    if !(len > T::zero()) {
        return Err(FlowError::Domain("direction must be nonzero".into()));
    }
    let p = T::one() + s;
    match n {
        1 => Ok(T::lit(2.0) * cs * a.get(0, 0).powf(-(T::lit(2.0) + s) / T::lit(2.0))),
        2 => {
            let xi = [direction[0] / len, direction[1] / len];
            let phi0 = xi[1].atan2(xi[0]);
            // |cos(φ−φ0)|^{1+s} vanishes at both ends of each half circle
            let sf = s.f64();
            let rule = gauss_jacobi(64, 1.0 + sf, 1.0 + sf);
            let mut total = T::zero();
            for half in [T::zero(), T::PI()] {
                for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let u = T::lit(u);
                    let phi = phi0 + half + T::FRAC_PI_2() * u;
                    let om = [phi.cos(), phi.sin()];
                    let c = (T::FRAC_PI_2() * u).cos().abs();
                    let smooth = (c / (T::one() - u * u)).powf(p);
                    let q = a.quad_form(&om);
                    total = total + T::lit(w) * smooth * q.powf(-(T::lit(3.0) + s) / T::lit(2.0));
                }
            }
            Ok(cs * T::FRAC_PI_2() * total)
        }
        _ => Err(FlowError::Domain(format!("symbol implemented for n ≤ 2, got {n}"))),
    }
}

/// Scalar symbol 2c_s A^{-(2+s)/2} of the 1D operator.
pub fn symbol_1d<T: Real>(a: T, s: T) -> Result<T> {
    compute_symbol(&Matrix::new(1, 1, vec![a]), s, &[T::one()])
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub sup_u: f64,
    pub sup_f: f64,
    pub norm_u_c1sa: Option<f64>,
    pub norm_f_ca: Option<f64>,
}

/// Mode coefficients on an N-point grid of [0, 1); û(k, 0) = 0.
#[derive(Debug, Clone)]
pub struct SpectralState<T: Real> {
    pub modes: Vec<Complex<T>>,
    pub t: T,
    pub s: T,
    pub history: Vec<StepRecord>,
}

impl<T: Real> SpectralState<T> {
    pub fn new(n: usize, s: T) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(FlowError::Size(format!("grid size {n} must be a power of two >= 16")));
        }
        check_s(s.f64())?;
        Ok(Self { modes: vec![Complex::new(T::zero(), T::zero()); n], t: T::zero(), s, history: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn grid(&self) -> Vec<T> {
        (0..self.len()).map(|i| T::idx(i) / T::idx(self.len())).collect()
    }

    pub fn values(&self) -> Vec<T> {
        fourier::inverse_real(self.modes.clone())
    }

    /// Coefficient of e^{2πikx}, normalized so cos(2πkx) has 1/2 at ±k.
    pub fn coefficient(&self, k: i64) -> Complex<T> {
        let n = self.len() as i64;
        self.modes[k.rem_euclid(n) as usize] / T::idx(self.len())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions<T: Real> {
    pub dt: T,
    /// record C^{1+s+α} and C^α norms every this many steps (0: never)
    pub norm_every: usize,
    pub alpha: T,
}

fn periodic<T: Real>() -> Metric<T> {
    Metric::Periodic { length: T::one() }
}

fn sup_abs<T: Real>(u: &[T]) -> T {
    u.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Exponential integrator with f frozen at each step's midpoint and the
/// symbol integrated over the step: û ← e^{−Λ}û + dt·φ(Λ)f̂,
/// Λ = |k|^{1+s}∫a dt, φ(z) = (1 − e^{−z})/z.
pub fn evolve<T: Real>(
    mut state: SpectralState<T>,
    forcing: &dyn Fn(T) -> Vec<T>,
    coef: &dyn Fn(T) -> T,
    t_end: T,
    opts: &EvolveOptions<T>,
) -> Result<SpectralState<T>> {
    if !(opts.dt > T::zero()) {
        return Err(FlowError::Domain("dt must be positive".into()));
    }
    let n = state.len();
    let s = state.s;
    let span = t_end - state.t;
    if span <= T::zero() {
        return Ok(state);
    }
    let steps = (span / opts.dt).ceil().to_usize().unwrap_or(1).max(1);
    let dt = span / T::idx(steps);
    let gl = gauss_legendre(4);
    let powk: Vec<T> = (0..n).map(|i| T::lit(wavenumber(i, n).unsigned_abs() as f64).powf(T::one() + s)).collect();
    let metric = periodic::<T>();
    for step in 0..steps {
        let t0 = state.t;
        let mut g = T::zero();
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let tau = t0 + dt * T::lit(0.5 * (1.0 + x));
            g = g + T::lit(0.5 * w) * dt * symbol_1d(coef(tau), s)?;
        }
        let fvals = forcing(t0 + dt * T::lit(0.5));
        let fhat = fourier::forward(&fvals);
        for (i, m) in state.modes.iter_mut().enumerate() {
            let lam = g * powk[i];
            let decay = (-lam).exp();
            let phi = if lam > T::lit(1e-8) { -(-lam).exp_m1() / lam } else { T::one() - lam / T::lit(2.0) };
            *m = *m * decay + fhat[i] * (dt * phi);
        }
        state.t = t0 + dt;
        let u = state.values();
        let with_norms = opts.norm_every > 0 && ((step + 1) % opts.norm_every == 0 || step + 1 == steps);
        let (nu, nf) = if with_norms {
            let beta = s + opts.alpha;
            (
                Some(ck_beta_norm_on(&u, 1, beta, &metric)?.f64()),
                Some(ck_beta_norm_on(&fvals, 0, opts.alpha, &metric)?.f64()),
            )
        } else {
            (None, None)
        };
        state.history.push(StepRecord {
            t: state.t.f64(),
            sup_u: sup_abs(&u).f64(),
            sup_f: sup_abs(&fvals).f64(),
            norm_u_c1sa: nu,
            norm_f_ca: nf,
        });
    }
    Ok(state)
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxPrincipleReport {
    pub ratio: f64,
    pub horizon: f64,
    pub pass: bool,
}

/// sup_t‖u‖_∞ / ((1+T) sup_t‖f‖_∞) over a completed history.
pub fn max_principle_check(history: &[StepRecord], horizon: f64) -> MaxPrincipleReport {
    let su = history.iter().map(|r| r.sup_u).fold(0.0, f64::max);
    let sf = history.iter().map(|r| r.sup_f).fold(0.0, f64::max);
    let ratio = if sf > 0.0 { su / ((1.0 + horizon) * sf) } else { 0.0 };
    MaxPrincipleReport { ratio, horizon, pass: ratio <= 1.05 }
}

/// Time-independent band-limited forcing Σ a_k cos 2πkx + b_k sin 2πkx.
#[derive(Debug, Clone, Serialize)]
pub struct TrigForcing {
    pub modes: Vec<(usize, f64, f64)>,
}

impl TrigForcing {
    pub fn single(k: usize) -> Self {
        Self { modes: vec![(k, 1.0, 0.0)] }
    }

    pub fn values<T: Real>(&self, n: usize) -> Vec<T> {
        (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                T::lit(self.modes.iter().map(|&(k, a, b)| {
                    let w = std::f64::consts::TAU * k as f64 * x;
                    a * w.cos() + b * w.sin()
                }).sum())
            })
            .collect()
    }

    pub fn max_mode(&self) -> usize {
        self.modes.iter().map(|m| m.0).max().unwrap_or(0)
    }
}

/// Seeded corpus of forcings with modes 1..=kmax and unit-scale amplitudes.
pub fn random_corpus(count: usize, kmax: usize, seed: u64) -> Vec<TrigForcing> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.gen_range(1..=kmax.min(4));
            let modes = (0..m)
                .map(|_| (rng.gen_range(1..=kmax), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            TrigForcing { modes }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SchauderReport {
    pub constant: f64,
    pub corpus_size: usize,
    pub n: usize,
    pub ratios: Vec<f64>,
}

/// max over the corpus of sup_t‖u‖_{C^{1+s+α}} / sup_t‖f‖_{C^α}.
pub fn schauder_constant<T: Real>(
    coef: &dyn Fn(T) -> T,
    s: T,
    alpha: T,
    horizon: T,
    corpus: &[TrigForcing],
    n: usize,
    steps: usize,
) -> Result<SchauderReport> {
    if !(alpha > T::zero() && alpha < s.min(T::one() - s)) {
        return Err(FlowError::Domain(format!("α = {alpha} must lie in (0, min(s, 1−s))")));
    }
    let opts = EvolveOptions { dt: horizon / T::idx(steps), norm_every: (steps / 16).max(1), alpha };
    let mut ratios = Vec::with_capacity(corpus.len());
    for f in corpus {
        let vals: Vec<T> = f.values(n);
        let state = evolve(SpectralState::new(n, s)?, &|_| vals.clone(), coef, horizon, &opts)?;
        let nu = state.history.iter().filter_map(|r| r.norm_u_c1sa).fold(0.0, f64::max);
        let nf = state.history.iter().filter_map(|r| r.norm_f_ca).fold(0.0, f64::max);
        ratios.push(if nf > 0.0 { nu / nf } else { 0.0 });
    }
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    Ok(SchauderReport { constant, corpus_size: corpus.len(), n, ratios })
}

/// Direct quadrature of L_A u on the N-point grid of [0, 1): punctured
/// trapezoid over |z| ≤ P periods, zeta corrections from spectral u'',
/// u'''', u^{(6)}, and the analytic far field beyond P.
fn operator_quadrature_periods<T: Real>(u: &[T], a: T, s: T, periods: usize) -> Vec<T> {
    let n = u.len();
    let h = 1.0 / n as f64;
    let sf = s.f64();
    let p = 2.0 + sf;
    let scale = a.f64().powf(-p / 2.0);
    let reach = periods * n;
    // periodized punctured weights, half weight at z = ±P
    let mut w = vec![0.0f64; n];
    for j in 1..=reach {
        let z = j as f64 * h;
        let mut k = z.powf(-p) * h;
        if j == reach {
            k *= 0.5;
        }
        w[j % n] += k;
        w[(n - j % n) % n] += k;
    }
    let wsum: f64 = w.iter().sum();
    let ur: Vec<f64> = u.iter().map(|v| v.f64()).collect();
    let mean = ur.iter().sum::<f64>() / n as f64;
    let tp = std::f64::consts::TAU;
    let d = |order: u32| -> Vec<f64> {
        fourier::derivative(&ur, order).into_iter().map(|v| v * tp.powi(order as i32)).collect()
    };
    let (d2, d4, d6) = (d(2), d(4), d(6));
    // second antiderivative of u − ū
    let u2 = {
        let mut spec = fourier::forward(&ur);
        for (i, c) in spec.iter_mut().enumerate() {
            let k = wavenumber(i, n) as f64;
            *c = if k == 0.0 { Complex::new(0.0, 0.0) } else { *c * (-1.0 / (tp * tp * k * k)) };
        }
        fourier::inverse_real(spec)
    };
    let pf = periods as f64;
    (0..n)
        .map(|i| {
            let conv: f64 = (0..n).map(|r| w[r] * ur[(i + r) % n]).sum();
            let body = conv - ur[i] * wsum;
            let corr = punctured_correction(-p, h, &[0.0, d2[i], d4[i], d6[i]]);
            let far = -2.0 * (ur[i] - mean) * pf.powf(-1.0 - sf) / (1.0 + sf) - 2.0 * p * u2[i] * pf.powf(-p - 1.0);
            T::lit(scale * (body + corr + far))
        })
        .collect()
}

pub fn operator_quadrature<T: Real>(u: &[T], a: T, s: T) -> Result<Vec<T>> {
    check_s(s.f64())?;
    if !(a > T::zero()) {
        return Err(FlowError::Domain("A must be positive".into()));
    }
    let v5 = operator_quadrature_periods(u, a, s, 5);
    let v10 = operator_quadrature_periods(u, a, s, 10);
    let scale = v10.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let diff = v5.iter().zip(&v10).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
    let size = u.iter().fold(T::zero(), |m, v| m.max(v.abs())) * a.powf(-(T::lit(2.0) + s) / T::lit(2.0));
    if diff > T::tol(1e-6) * scale + T::tol(1e-9) * size {
        return Err(FlowError::Accuracy(format!("period truncation changes the result by {diff:e}")));
    }
    Ok(v5)
}
