//! Height-function representation of star-shaped planar sets.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::fourier::{self, TrigInterpolant};
use crate::roots::brent;
use crate::scalar::{dot, norm, sub, unit, Real};

/// Boundary {h(θ)e(θ)} sampled at θ_i = 2πi/N with spectral derivatives.
#[derive(Debug, Clone)]
pub struct HeightField<T: Real> {
    values: Vec<T>,
    d1: Vec<T>,
    d2: Vec<T>,
    interp: TrigInterpolant<T>,
}

impl<T: Real> HeightField<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        let n = values.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(FlowError::Size(format!(
                "grid size {n} must be a power of two >= 16"
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > T::zero()))
        {
            return Err(FlowError::Domain(format!("height at node {i} is {v}, must be > 0")));
        }
        let d1 = fourier::derivative(&values, 1);
        let d2 = fourier::derivative(&values, 2);
        let interp = TrigInterpolant::new(&values);
        Ok(Self { values, d1, d2, interp })
    }

    /// Samples θ ↦ f(θ) on the N-point grid.
    pub fn from_fn(n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let dtheta = T::TAU() / T::idx(n);
        Self::new((0..n).map(|i| f(T::idx(i) * dtheta)).collect())
    }

    pub fn constant(n: usize, r: T) -> Result<Self> {
        Self::new(vec![r; n])
    }

    /// Ambient boundary dimension; curves only.
    pub fn dim(&self) -> usize {
        1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn d1(&self) -> &[T] {
        &self.d1
    }

    pub fn d2(&self) -> &[T] {
        &self.d2
    }

    pub fn spacing(&self) -> T {
        T::TAU() / T::idx(self.len())
    }

    pub fn angle(&self, i: usize) -> T {
        T::idx(i) * self.spacing()
    }

    pub fn point(&self, i: usize) -> [T; 2] {
        let e = unit(self.angle(i));
        [self.values[i] * e[0], self.values[i] * e[1]]
    }

    /// Interpolated (h, h') at an arbitrary angle.
    pub fn eval(&self, theta: T) -> (T, T) {
        self.interp.eval(theta)
    }

    pub fn height_at(&self, theta: T) -> T {
        self.interp.value(theta)
    }

    /// |p| − h(arg p): negative strictly inside, positive outside.
    pub fn inclusion(&self, p: [T; 2]) -> T {
        norm(p) - self.height_at(p[1].atan2(p[0]))
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| v * c).collect())
    }

    pub fn trig(&self) -> &TrigInterpolant<T> {
        &self.interp
    }
}

pub fn build_field<T: Real>(samples: &[T]) -> Result<HeightField<T>> {
    HeightField::new(samples.to_vec())
}

pub fn area<T: Real>(field: &HeightField<T>) -> T {
    let s: T = field.values().iter().map(|&h| h * h).sum();
    T::lit(0.5) * s * field.spacing()
}

pub fn barycenter<T: Real>(field: &HeightField<T>) -> [T; 2] {
    let dth = field.spacing();
    let third = T::lit(1.0 / 3.0);
    let mut b = [T::zero(); 2];
    for (i, &h) in field.values().iter().enumerate() {
        let e = unit(field.angle(i));
        let w = h * h * h * third;
        b[0] = b[0] + w * e[0];
        b[1] = b[1] + w * e[1];
    }
    let a = area(field);
    [b[0] * dth / a, b[1] * dth / a]
}

/// J = √(h² + h'²) (h^{n−1} = 1 for curves) at node i.
pub fn jacobian<T: Real>(field: &HeightField<T>, i: usize) -> T {
    field.values()[i].hypot(field.d1()[i])
}

/// Outward unit normal (h e_r − h' e_θ)/J and the Jacobian J.
pub fn normal_and_jacobian<T: Real>(field: &HeightField<T>, i: usize) -> ([T; 2], T) {
    let (h, hp) = (field.values()[i], field.d1()[i]);
    let j = h.hypot(hp);
    let th = field.angle(i);
    let (c, s) = (th.cos(), th.sin());
    let nu = [(h * c + hp * s) / j, (h * s - hp * c) / j];
    (nu, j)
}

/// Signed curvature of the polar curve; positive on convex arcs.
pub fn polar_curvature<T: Real>(field: &HeightField<T>, i: usize) -> T {
    let (h, hp, hpp) = (field.values()[i], field.d1()[i], field.d2()[i]);
    let j2 = h * h + hp * hp;
    (h * h + T::lit(2.0) * hp * hp - h * hpp) / (j2 * j2.sqrt())
}

pub fn min_curvature<T: Real>(field: &HeightField<T>) -> T {
    (0..field.len())
        .map(|i| polar_curvature(field, i))
        .fold(T::infinity(), T::min)
}

pub fn tol_convex<T: Real>(field: &HeightField<T>) -> T {
    T::lit(1e-8) / field.max()
}

pub fn is_convex<T: Real>(field: &HeightField<T>) -> bool {
    min_curvature(field) >= -tol_convex(field)
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeMetrics<T: Real> {
    pub area: T,
    pub barycenter: [T; 2],
    pub inradius: T,
    pub circumradius: T,
    pub convex: bool,
    pub slope_constant: T,
    pub min_curvature: T,
}

/// sup over ordered node pairs of ⟨x−y, ν(x)⟩/|x−y|^{1+s}.
pub fn slope_constant<T: Real>(field: &HeightField<T>, s: T) -> T {
    let n = field.len();
    let pts: Vec<[T; 2]> = (0..n).map(|i| field.point(i)).collect();
    let expo = T::one() + s;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let (nu, _) = normal_and_jacobian(field, i);
            let mut best = T::neg_infinity();
            for (j, &y) in pts.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = sub(pts[i], y);
                let q = dot(d, nu) / norm(d).powf(expo);
                best = best.max(q);
            }
            best
        })
        .reduce(|| T::neg_infinity(), T::max)
}

/// Ball radii about the origin: B_r ⊂ E ⊂ B_R with r = min h, R = max h.
pub fn shape_metrics<T: Real>(field: &HeightField<T>, s: T) -> ShapeMetrics<T> {
    let kmin = min_curvature(field);
    ShapeMetrics {
        area: area(field),
        barycenter: barycenter(field),
        inradius: field.min(),
        circumradius: field.max(),
        convex: kmin >= -tol_convex(field),
        slope_constant: slope_constant(field, s),
        min_curvature: kmin,
    }
}

/// Height function of E − c, found per grid angle by root-finding the
/// radial inclusion test along the ray from c.
pub fn recenter<T: Real>(field: &HeightField<T>, c: [T; 2]) -> Result<HeightField<T>> {
    if field.inclusion(c) >= T::zero() {
        return Err(FlowError::Geometry(
            "translation moves the origin outside the set".into(),
        ));
    }
    let rmax = T::lit(2.0) * field.max() + norm(c);
    let xtol = T::epsilon() * field.max() * T::lit(4.0);
    let vals: Result<Vec<T>> = (0..field.len())
        .map(|i| {
            let e = unit(field.angle(i));
            let g = |r: T| field.inclusion([c[0] + r * e[0], c[1] + r * e[1]]);
            let (g0, g1) = (g(T::zero()), g(rmax));
            brent(g, T::zero(), rmax, g0, g1, xtol, 200).ok_or_else(|| {
                FlowError::Geometry(format!("boundary crossing not bracketed at node {i}"))
            })
        })
        .collect();
    HeightField::new(vals?)
}

/// Translate the barycenter to the origin and scale to `target_area`.
pub fn rescale_and_center<T: Real>(field: &HeightField<T>, target_area: T) -> Result<HeightField<T>> {
    if !(target_area > T::zero()) {
        return Err(FlowError::Domain(format!("target area {target_area} must be > 0")));
    }
    let b = barycenter(field);
    let centered = if norm(b) > T::lit(64.0) * T::epsilon() * field.max() {
        recenter(field, b)?
    } else {
        field.clone()
    };
    let c = (target_area / area(&centered)).sqrt();
    centered.scaled(c)
}

/// One "angle,value" line per node, 17 significant digits.
pub fn write_csv<T: Real>(field: &HeightField<T>, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "angle,height")?;
    for (i, v) in field.values().iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e}", field.angle(i), v)?;
    }
    Ok(())
}

pub fn read_csv<T: Real>(input: impl BufRead) -> Result<HeightField<T>> {
    let mut vals = Vec::new();
    for (ln, line) in input.lines().enumerate() {
        let line = line.map_err(|e| FlowError::Domain(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("angle") {
            continue;
        }
        let v = line
            .split(',')
            .nth(1)
            .and_then(|x| x.trim().parse::<f64>().ok())
            .ok_or_else(|| FlowError::Domain(format!("line {}: expected angle,value", ln + 1)))?;
        vals.push(T::lit(v));
    }
    HeightField::new(vals)
}
