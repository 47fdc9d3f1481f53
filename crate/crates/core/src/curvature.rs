//! Fractional mean curvature H^s of convex planar sets.
//!
//! Production routes:
//! * chord quadrature: H(x) = (2/s)∫_{-π/2}^{π/2} ρ(φ)^{-s} dφ over interior
//!   ray directions (tangent half-plane subtracted), Gauss–Jacobi in φ;
//! * boundary integral: H(x) = (2/s)∫⟨y−x, ν(y)⟩|y−x|^{-2-s} dH¹(y), a
//!   weakly singular periodic integral done by a zeta-corrected trapezoid.
//!
//! `pv_oracle` integrates χ_{E^c} − χ_E over annuli and is the brute-force
//! cross-check.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::geometry::{is_convex, jacobian, normal_and_jacobian, polar_curvature, HeightField};
use crate::quadrature::{
    gauss_jacobi, gauss_legendre, punctured_correction, second_derivative_at_zero, zeta,
};
use crate::roots::brent;
use crate::scalar::{dot, norm, sub, unit, Real};
use crate::shapes::ellipse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMethod {
    ChordQuadrature,
    PvOracle,
    BoundaryIntegral,
}

impl std::str::FromStr for CurvatureMethod {
    type Err = FlowError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chord" | "chord_quadrature" => Ok(Self::ChordQuadrature),
            "pv" | "pv_oracle" => Ok(Self::PvOracle),
            "boundary" | "boundary_integral" => Ok(Self::BoundaryIntegral),
            _ => Err(FlowError::Domain(format!("unknown curvature method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CurvatureOptions {
    pub method: CurvatureMethod,
    /// Gauss–Jacobi nodes per chord integral; the check uses twice as many.
    pub quad_nodes: usize,
    pub rtol: f64,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        Self { method: CurvatureMethod::ChordQuadrature, quad_nodes: 128, rtol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSample<T: Real> {
    pub s: T,
    pub values: Vec<T>,
    pub average: T,
    pub dissipation: T,
    pub method: CurvatureMethod,
}

impl<T: Real> CurvatureSample<T> {
    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Surface-weighted average and dissipation ∫(H − H̄)² dH¹.
    pub fn from_values(field: &HeightField<T>, s: T, values: Vec<T>, method: CurvatureMethod) -> Self {
        let jac: Vec<T> = (0..field.len()).map(|i| jacobian(field, i)).collect();
        let wsum: T = jac.iter().copied().sum();
        let average = values.iter().zip(&jac).map(|(&h, &j)| h * j).sum::<T>() / wsum;
        let dissipation = values
            .iter()
            .zip(&jac)
            .map(|(&h, &j)| (h - average).powi(2) * j)
            .sum::<T>()
            * field.spacing();
        Self { s, values, average, dissipation, method }
    }
}

fn check_s<T: Real>(s: T) -> Result<()> {
    if s > T::zero() && s < T::one() {
        Ok(())
    } else {
        Err(FlowError::Domain(format!("s = {s} must lie in (0, 1)")))
    }
}

fn rotate<T: Real>(v: [T; 2], phi: T) -> [T; 2] {
    let (c, s) = (phi.cos(), phi.sin());
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Boundary point and outward unit normal at an arbitrary angle.
fn boundary_frame<T: Real>(field: &HeightField<T>, theta: T) -> ([T; 2], [T; 2]) {
    let (h, hp) = field.eval(theta);
    let (c, s) = (theta.cos(), theta.sin());
    let j = h.hypot(hp);
    ([h * c, h * s], [(h * c + hp * s) / j, (h * s - hp * c) / j])
}

/// Length of E ∩ {x + r d : r > 0} for x on the boundary and d pointing
/// into the set. Bisection until an interior point is bracketed, then
/// Brent on the inclusion test, to 1e-12·R.
fn chord_along<T: Real>(field: &HeightField<T>, x: [T; 2], d: [T; 2]) -> Result<T> {
    let big = field.max();
    let tol = T::tol(1e-12) * big;
    let g = |r: T| field.inclusion([x[0] + r * d[0], x[1] + r * d[1]]);
    let mut hi = T::lit(2.02) * big;
    let ghi = g(hi);
    if ghi <= T::zero() {
        return Err(FlowError::Geometry("ray does not leave the set".into()));
    }
    let mut lo = T::zero();
    let mut glo = T::zero();
    let mut ghi = ghi;
    while hi - lo > tol {
        let mid = T::lit(0.5) * (lo + hi);
        let gm = g(mid);
        if gm < T::zero() {
            lo = mid;
            glo = gm;
            break;
        }
        hi = mid;
        ghi = gm;
    }
    if glo >= T::zero() {
        // no strictly interior point found above the tolerance
        return Ok(T::lit(0.5) * (lo + hi));
    }
    brent(g, lo, hi, glo, ghi, tol, 100)
        .ok_or_else(|| FlowError::Geometry("chord bracket failure".into()))
}

/// ρ(φ) at a grid node, φ measured from the inward normal.
pub fn ray_chord<T: Real>(field: &HeightField<T>, node: usize, phi: T) -> Result<T> {
    if !(phi.abs() < T::FRAC_PI_2()) {
        return Err(FlowError::Domain(format!("ray angle {phi} must satisfy |φ| < π/2")));
    }
    let x = field.point(node);
    let (nu, _) = normal_and_jacobian(field, node);
    chord_along(field, x, rotate([-nu[0], -nu[1]], phi))
}

/// (2/s)∫_{-π/2}^{π/2} ρ(φ)^{-s} dφ with ρ supplied; φ = πu/2 and the
/// (1−u²)^{-s} endpoint behaviour carried by a Gauss–Jacobi weight.
/// Infinite chords contribute nothing.
pub fn curvature_from_chords<T: Real>(s: T, nodes: usize, mut rho: impl FnMut(T) -> Result<T>) -> Result<T> {
    let sf = s.f64();
    let rule = gauss_jacobi(nodes, -sf, -sf);
    let half_pi = T::FRAC_PI_2();
    let mut acc = T::zero();
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let r = rho(half_pi * T::lit(u))?;
        if r.is_infinite() {
            continue;
        }
        let u = T::lit(u);
        acc = acc + T::lit(w) * ((T::one() - u * u) / r).powf(s);
    }
    Ok(T::lit(2.0) / s * half_pi * acc)
}

fn chord_curvature<T: Real>(
    field: &HeightField<T>,
    x: [T; 2],
    nu: [T; 2],
    s: T,
    opts: &CurvatureOptions,
) -> Result<T> {
    let inward = [-nu[0], -nu[1]];
    let rho = |phi: T| chord_along(field, x, rotate(inward, phi));
    let coarse = curvature_from_chords(s, opts.quad_nodes, rho)?;
    let fine = curvature_from_chords(s, 2 * opts.quad_nodes, rho)?;
    if (coarse - fine).abs() > T::tol(opts.rtol) * fine.abs() {
        return Err(FlowError::Accuracy(format!(
            "chord quadrature not converged: {coarse} vs {fine}"
        )));
    }
    Ok(fine)
}

fn require_convex<T: Real>(field: &HeightField<T>) -> Result<()> {
    if is_convex(field) {
        Ok(())
    } else {
        Err(FlowError::Method(
            "chord quadrature needs a convex field; use the pv oracle".into(),
        ))
    }
}

pub fn frac_curvature_at<T: Real>(field: &HeightField<T>, node: usize, s: T) -> Result<T> {
    frac_curvature_with(field, node, s, &CurvatureOptions::default())
}

pub fn frac_curvature_with<T: Real>(
    field: &HeightField<T>,
    node: usize,
    s: T,
    opts: &CurvatureOptions,
) -> Result<T> {
    check_s(s)?;
    require_convex(field)?;
    let (nu, _) = normal_and_jacobian(field, node);
    chord_curvature(field, field.point(node), nu, s, opts)
}

/// Chord-quadrature curvature at the boundary point of angle θ.
pub fn frac_curvature_at_angle<T: Real>(field: &HeightField<T>, theta: T, s: T, opts: &CurvatureOptions) -> Result<T> {
    check_s(s)?;
    require_convex(field)?;
    let (x, nu) = boundary_frame(field, theta);
    chord_curvature(field, x, nu, s, opts)
}

pub fn curvature_field<T: Real>(field: &HeightField<T>, s: T) -> Result<CurvatureSample<T>> {
    curvature_field_with(field, s, &CurvatureOptions::default())
}

pub fn curvature_field_with<T: Real>(
    field: &HeightField<T>,
    s: T,
    opts: &CurvatureOptions,
) -> Result<CurvatureSample<T>> {
    check_s(s)?;
    let values: Vec<T> = match opts.method {
        CurvatureMethod::ChordQuadrature => {
            require_convex(field)?;
            (0..field.len())
                .into_par_iter()
                .map(|i| {
                    let (nu, _) = normal_and_jacobian(field, i);
                    chord_curvature(field, field.point(i), nu, s, opts)
                })
                .collect::<Result<Vec<T>>>()?
        }
        CurvatureMethod::PvOracle => (0..field.len())
            .into_par_iter()
            .map(|i| pv_oracle(field, i, s))
            .collect::<Result<Vec<T>>>()?,
        CurvatureMethod::BoundaryIntegral => boundary_curvature(field, s),
    };
    Ok(CurvatureSample::from_values(field, s, values, opts.method))
}

/// Sine/cosine of t_k = kΔθ, shared by the O(N²) boundary sums.
fn trig_table<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let dth = T::TAU() / T::idx(n);
    (0..n).map(|k| {
        let t = T::idx(k) * dth;
        (t.cos(), t.sin())
    }).unzip()
}

/// Zeta-corrected boundary-integral curvature at every node.
pub fn boundary_curvature<T: Real>(field: &HeightField<T>, s: T) -> Vec<T> {
    let n = field.len();
    let h = field.values();
    let hp = field.d1();
    let dth = field.spacing();
    let (cos_t, sin_t) = trig_table::<T>(n);
    let expo = -(T::lit(2.0) + s) / T::lit(2.0);
    let two = T::lit(2.0);

    // D_ij^{-(2+s)/2} is symmetric in (i, j): one power per unordered pair
    let mut sum = vec![T::zero(); n];
    for i in 0..n {
        let (hi, hpi) = (h[i], hp[i]);
        let mut acc = T::zero();
        for j in (i + 1)..n {
            let k = j - i;
            let (c, sn) = (cos_t[k], sin_t[k]);
            let (hj, hpj) = (h[j], hp[j]);
            let p = (hi * hi + hj * hj - two * hi * hj * c).powf(expo);
            acc = acc + (hj * hj - hi * (hj * c + hpj * sn)) * p;
            sum[j] = sum[j] + (hi * hi - hj * (hi * c - hpi * sn)) * p;
        }
        sum[i] = sum[i] + acc;
    }

    let sf = s.f64();
    let z0 = T::lit(-2.0 * zeta(sf)) * dth.powf(T::one() - s);
    let dthf = dth.f64();
    let two_over_s = two / s;
    (0..n)
        .map(|i| {
            let f = |j: usize| {
                let k = (j + n - i) % n;
                let num = h[j] * h[j] - h[i] * (h[j] * cos_t[k] + hp[j] * sin_t[k]);
                let d = h[i] * h[i] + h[j] * h[j] - two * h[i] * h[j] * cos_t[k];
                num * d.powf(expo)
            };
            let jac = h[i].hypot(hp[i]);
            let g0 = polar_curvature(field, i) * jac.powf(T::one() - s) / two;
            let at = |o: isize| {
                let j = ((i as isize + o).rem_euclid(n as isize)) as usize;
                (f(j) * (T::idx(o.unsigned_abs()) * dth).powf(s)).f64()
            };
            let g2 = second_derivative_at_zero(g0.f64(), [at(1), at(-1)], [at(2), at(-2)], dthf);
            let corr = z0 * g0 + T::lit(punctured_correction(-sf, dthf, &[0.0, g2]));
            two_over_s * (sum[i] * dth + corr)
        })
        .collect()
}

/// Local extrema of |y − x| along the boundary away from x itself, refined
/// off-grid by golden section: (distance, point), sorted by distance.
fn critical_points<T: Real>(field: &HeightField<T>, node: usize) -> Vec<(T, [T; 2])> {
    let n = field.len();
    let x = field.point(node);
    let at = |th: T| {
        let p = unit(th);
        let r = field.height_at(th);
        [r * p[0], r * p[1]]
    };
    let dist = |th: T| norm(sub(at(th), x));
    let d: Vec<T> = (0..n).map(|i| norm(sub(field.point(i), x))).collect();
    let dth = field.spacing();
    let gr = T::lit(0.618_033_988_749_894_9);
    let mut out = Vec::new();
    for i in 0..n {
        let off = (i + n - node) % n;
        if off <= 2 || off >= n - 2 {
            continue;
        }
        let (l, r) = (d[(i + n - 1) % n], d[(i + 1) % n]);
        let sign = if d[i] >= l && d[i] > r {
            T::one()
        } else if d[i] <= l && d[i] < r {
            -T::one()
        } else {
            continue;
        };
        let f = |th: T| sign * dist(th);
        let (mut a, mut b) = (field.angle(i) - dth, field.angle(i) + dth);
        let mut c = b - gr * (b - a);
        let mut e = a + gr * (b - a);
        for _ in 0..80 {
            if f(c) > f(e) {
                b = e;
            } else {
                a = c;
            }
            c = b - gr * (b - a);
            e = a + gr * (b - a);
        }
        let th = T::lit(0.5) * (a + b);
        out.push((dist(th), at(th)));
    }
    out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    out
}

/// Angular measure of {φ : x + r e(φ) ∈ E}, from sign changes of the
/// inclusion test on sampled angles, refined by Brent.
fn inside_measure<T: Real>(field: &HeightField<T>, x: [T; 2], r: T, extra: &[T]) -> T {
    const SAMPLES: usize = 128;
    let tau = T::TAU();
    let wrap = |a: T| {
        let m = a % tau;
        if m < T::zero() { m + tau } else { m }
    };
    let mut angles: Vec<T> = (0..SAMPLES).map(|k| T::idx(k) * tau / T::idx(SAMPLES)).collect();
    angles.extend(extra.iter().map(|&a| wrap(a)));
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let g = |phi: T| field.inclusion([x[0] + r * phi.cos(), x[1] + r * phi.sin()]);
    let vals: Vec<T> = angles.iter().map(|&a| g(a)).collect();
    let xtol = T::tol(1e-14);
    let mut total = T::zero();
    for k in 0..angles.len() {
        let k2 = (k + 1) % angles.len();
        let a = angles[k];
        let b = if k2 == 0 { angles[0] + tau } else { angles[k2] };
        let (ga, gb) = (vals[k], vals[k2]);
        let (ia, ib) = (ga < T::zero(), gb < T::zero());
        if ia && ib {
            total = total + (b - a);
        } else if ia != ib {
            let c = brent(g, a, b, ga, gb, xtol, 100).unwrap_or(T::lit(0.5) * (a + b));
            total = total + if ia { c - a } else { b - c };
        }
    }
    total
}

/// Brute-force principal value ∫_0^∞ r^{-1-s} m(r) dr with
/// m(r) = 2π − 2·|inside arc|, annular cutoff ε and Richardson
/// extrapolation in ε (error terms ε^{1−s}, ε^{2−s}).
pub fn pv_oracle<T: Real>(field: &HeightField<T>, node: usize, s: T) -> Result<T> {
    check_s(s)?;
    let x = field.point(node);
    let (nu, _) = normal_and_jacobian(field, node);
    let phi_in = (-nu[1]).atan2(-nu[0]);
    let crit = critical_points(field, node);
    let rmax = crit.last().map(|c| c.0).ok_or_else(|| FlowError::Geometry("no farthest point".into()))?;
    let mut extra = vec![phi_in];
    extra.extend(crit.iter().map(|(_, p)| (p[1] - x[1]).atan2(p[0] - x[0])));
    let tau = T::TAU();
    let weight = |r: T| r.powf(-T::one() - s) * (tau - T::lit(2.0) * inside_measure(field, x, r, &extra));

    let gl = gauss_legendre(12);
    let panel = |a: T, b: T| -> T {
        let (a, b) = (a.f64(), b.f64());
        T::lit(gl.integrate_on(a, b, |r| weight(T::lit(r)).f64()))
    };
    // outer panels split at every critical radius; r = m + w sin φ absorbs
    // the square-root edges of the arcs there
    let r_out = T::lit(0.5) * rmax.min(crit[0].0);
    let gl_out = gauss_legendre(40);
    let mut breaks = vec![r_out];
    breaks.extend(crit.iter().map(|c| c.0).filter(|&r| r > r_out));
    breaks.dedup_by(|p, q| (*p - *q).abs() <= T::tol(1e-12) * rmax);
    let outer: T = breaks
        .windows(2)
        .map(|w| {
            let (m, hw) = (T::lit(0.5) * (w[0] + w[1]), T::lit(0.5) * (w[1] - w[0]));
            let (mf, hf) = (m.f64(), hw.f64());
            T::lit(gl_out.integrate_on(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, |phi| {
                hf * phi.cos() * weight(T::lit(mf + hf * phi.sin())).f64()
            }))
        })
        .sum();
    let tail = tau * rmax.powf(-s) / s;

    let levels = 5;
    let eps0 = rmax / T::lit(64.0);
    // geometric panels from eps0 up to r_out
    let mut mid = T::zero();
    let mut a = eps0;
    while a < r_out {
        let b = (a * T::lit(2.0)).min(r_out);
        mid = mid + panel(a, b);
        a = b;
    }
    let mut cut = Vec::with_capacity(levels);
    let mut acc = mid;
    let mut eps = eps0;
    cut.push(acc);
    for _ in 1..levels {
        acc = acc + panel(eps / T::lit(2.0), eps);
        eps = eps / T::lit(2.0);
        cut.push(acc);
    }
    // I(ε) = I0 + Σ b_k ε^{k−s}, k = 1, 2, 3; eliminated one power at a time
    let mut seq = cut;
    for k in 1..=3 {
        let q = T::lit(2.0).powf(T::idx(k) - s);
        seq = seq.windows(2).map(|w| (q * w[1] - w[0]) / (q - T::one())).collect();
    }
    let (best, prev) = (seq[seq.len() - 1], seq[seq.len() - 2]);
    let total = best + outer + tail;
    if (best - prev).abs() > T::tol(1e-6) * total.abs().max(rmax.powf(-s)) {
        return Err(FlowError::Accuracy(format!(
            "cutoff extrapolation not converged: {} vs {}",
            prev + outer + tail,
            total
        )));
    }
    Ok(total)
}

/// Unit-disk circle value H*(s) = (2^{1−s}/s)∫cos^{−s}φ dφ via the same
/// chord rule with ρ = 2cos φ.
pub fn circle_curvature<T: Real>(s: T) -> T {
    curvature_from_chords(s, 128, |phi| Ok(T::lit(2.0) * phi.cos())).expect("closed-form chords")
}

/// Fractional perimeter through the boundary form
/// P_s = s^{-2} ∬⟨ν(x), ν(y)⟩|x−y|^{-s} dH¹dH¹ with the zeta-corrected
/// trapezoid for the |t|^{-s} diagonal.
pub fn fractional_perimeter<T: Real>(field: &HeightField<T>, s: T) -> Result<T> {
    check_s(s)?;
    let n = field.len();
    let dth = field.spacing();
    let pts: Vec<[T; 2]> = (0..n).map(|i| field.point(i)).collect();
    let nj: Vec<[T; 2]> = (0..n)
        .map(|i| {
            let (nu, j) = normal_and_jacobian(field, i);
            [nu[0] * j, nu[1] * j]
        })
        .collect();
    let sf = s.f64();
    let dthf = dth.f64();
    let total: T = (0..n)
        .into_par_iter()
        .map(|i| {
            let f = |j: usize| dot(nj[i], nj[j]) * norm(sub(pts[i], pts[j])).powf(-s);
            let mut sum = T::zero();
            for j in 0..n {
                if j != i {
                    sum = sum + f(j);
                }
            }
            let jac = jacobian(field, i);
            let g0 = jac.powf(T::lit(2.0) - s).f64();
            let at = |o: isize| {
                let j = ((i as isize + o).rem_euclid(n as isize)) as usize;
                (f(j) * (T::idx(o.unsigned_abs()) * dth).powf(s)).f64()
            };
            let g2 = second_derivative_at_zero(g0, [at(1), at(-1)], [at(2), at(-2)], dthf);
            sum * dth + T::lit(punctured_correction(-sf, dthf, &[g0, g2]))
        })
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), |a, b| a + b);
    Ok(total * dth / (s * s))
}

/// Symmetric principal value of Σ_{j≠i} f(j) Δθ for an integrand that
/// behaves like m(t)|t|^{-2-s} around t = θ_j − θ_i, sampled with grid
/// stride `stride`. The hypersingular remainder is removed by the zeta
/// correction with m''(0) from a central stencil; the rule is linear in
/// the integrand values when `m0` is zero.
pub(crate) fn hypersingular_pv<T: Real>(
    n: usize,
    node: usize,
    dth: T,
    s: T,
    stride: usize,
    m0: T,
    f: impl Fn(usize) -> T,
) -> T {
    let h = dth * T::idx(stride);
    let gamma = -(T::lit(2.0) + s);
    let mut sum = T::zero();
    let mut j = (node + stride) % n;
    while j != node {
        sum = sum + f(j);
        j = (j + stride) % n;
    }
    let m = |o: isize| {
        let j = ((node as isize + o * stride as isize).rem_euclid(n as isize)) as usize;
        (f(j) * (T::idx(o.unsigned_abs()) * h).powf(-gamma)).f64()
    };
    let hf = h.f64();
    let m2 = second_derivative_at_zero(m0.f64(), [m(1), m(-1)], [m(2), m(-2)], hf);
    sum * h + T::lit(punctured_correction(gamma.f64(), hf, &[m0.f64(), m2]))
}

fn pv_directional<T: Real>(field: &HeightField<T>, node: usize, xv: [T; 2], s: T, stride: usize) -> T {
    let x = field.point(node);
    let expo = -(T::lit(2.0) + s);
    let (nu0, jac0) = normal_and_jacobian(field, node);
    let m0 = dot(xv, nu0) * jac0.powf(T::one() + expo);
    hypersingular_pv(field.len(), node, field.spacing(), s, stride, m0, |j| {
        let (nu, jac) = normal_and_jacobian(field, j);
        dot(xv, nu) * jac * norm(sub(field.point(j), x)).powf(expo)
    })
}

/// ∇_X H^s(x) = C_{n,s} PV∫⟨X(x), ν(y)⟩|y−x|^{-2-s} dH¹(y), the derivative
/// of H along a tangent direction at x. `xs[i]` is the vector at node i;
/// only the entry at `node` enters.
pub fn directional_derivative_h<T: Real>(
    field: &HeightField<T>,
    node: usize,
    xs: &[[T; 2]],
    s: T,
    c_ns: T,
) -> Result<T> {
    check_s(s)?;
    if xs.len() != field.len() {
        return Err(FlowError::Size("vector field length differs from the grid".into()));
    }
    let xv = xs[node];
    let fine = pv_directional(field, node, xv, s, 1);
    let coarse = pv_directional(field, node, xv, s, 2);
    let floor = T::tol(1e-9) * norm(xv) * field.max().powf(-T::one() - s);
    if (fine - coarse).abs() > T::lit(5e-2) * (fine.abs() + coarse.abs()) + floor {
        return Err(FlowError::Accuracy(format!(
            "symmetric pairing not converged at node {node}: {fine} vs {coarse}"
        )));
    }
    Ok(c_ns * fine)
}

/// η'(θ) = h'e_r + h e_θ at every node: moving along the boundary.
pub fn tangent_field<T: Real>(field: &HeightField<T>) -> Vec<[T; 2]> {
    (0..field.len())
        .map(|i| {
            let th = field.angle(i);
            let (c, s) = (th.cos(), th.sin());
            let (h, hp) = (field.values()[i], field.d1()[i]);
            [hp * c - h * s, hp * s + h * c]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Calibration {
    pub c_ns: f64,
    /// max relative deviation of the per-node ratios from their mean
    pub spread: f64,
    pub nodes: usize,
}

/// Ratio of the finite-difference derivative of H along the boundary to
/// the integral with unit constant, on the reference ellipse a = 1.3.
pub fn calibrate_c_ns_report(s: f64) -> Result<Calibration> {
    check_s(s)?;
    let n = 256;
    let field = ellipse::<f64>(n, 1.3, 1.0 / 1.3)?;
    let xs = tangent_field(&field);
    let opts = CurvatureOptions::default();
    let delta = 1e-3;
    let nodes: Vec<usize> = (0..8).map(|m| (2 * m + 1) * n / 32).filter(|i| i % (n / 4) != 0).collect();
    let ratios = nodes
        .par_iter()
        .map(|&i| {
            let th = field.angle(i);
            let hp = frac_curvature_at_angle(&field, th + delta, s, &opts)?;
            let hm = frac_curvature_at_angle(&field, th - delta, s, &opts)?;
            let fd = (hp - hm) / (2.0 * delta);
            Ok(fd / directional_derivative_h(&field, i, &xs, s, 1.0)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| ((r - mean) / mean).abs()).fold(0.0, f64::max);
    Ok(Calibration { c_ns: mean, spread, nodes: ratios.len() })
}

/// Calibrated C_{1,s}, computed once per s and cached.
pub fn calibrate_c_ns(s: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&c) = cache.lock().unwrap().get(&s.to_bits()) {
        return Ok(c);
    }
    let c = calibrate_c_ns_report(s)?.c_ns;
    cache.lock().unwrap().insert(s.to_bits(), c);
    Ok(c)
}

