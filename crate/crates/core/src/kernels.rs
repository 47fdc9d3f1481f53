//! Matrix field A(x) = h²I + ∇_τh ⊗ ∇_τh on the unit circle, the kernels
//! K_A(y, x) = ⟨A(x)(y−x), y−x⟩^{-(n+1+s)/2}, the splitting
//! |h(y)y − h(x)x|² = ‖y−x‖²_{A(x)} + g_h(y, x), and randomized checks of
//! the kernel and convolution lemmas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::hypersingular_pv;
use crate::error::{FlowError, Result};
use crate::geometry::HeightField;
use crate::norms::{holder_seminorm, Metric};
use crate::scalar::{dot, norm, sub, unit, Real};

/// Small dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n, n, vec![T::zero(); n * n]);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn scaled_identity(n: usize, c: T) -> Self {
        let mut m = Self::identity(n);
        m.data.iter_mut().for_each(|v| *v = *v * c);
        m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![T::zero(); self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.get(i, j);
            }
        }
        Self::new(self.cols, self.rows, out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = vec![T::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..other.cols {
                out[i * other.cols + j] =
                    (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum();
            }
        }
        Self::new(self.rows, other.cols, out)
    }

    pub fn quad_form(&self, v: &[T]) -> T {
        (0..self.rows)
            .map(|i| v[i] * (0..self.cols).map(|j| self.get(i, j) * v[j]).sum::<T>())
            .sum()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Symmetric and Cholesky-factorizable.
    pub fn is_spd(&self) -> bool {
        if !self.is_symmetric(T::epsilon() * T::lit(64.0) * self.max_abs()) {
            return false;
        }
        let n = self.rows;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d = d - l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut v = self.get(i, j);
                for k in 0..j {
                    v = v - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / d;
            }
        }
        true
    }

    fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Ã = JᵀAJ for the graph chart φ with J = [I_n; ∇φᵀ].
pub fn pullback<T: Real>(a: &Matrix<T>, grad_phi: &[T]) -> Result<Matrix<T>> {
    let n = grad_phi.len();
    if a.rows != n + 1 || a.cols != n + 1 {
        return Err(FlowError::Size(format!("A must be {0}x{0} for a chart of dimension {n}", n + 1)));
    }
    let mut j = vec![T::zero(); (n + 1) * n];
    for i in 0..n {
        j[i * n + i] = T::one();
        j[n * n + i] = grad_phi[i];
    }
    let j = Matrix::new(n + 1, n, j);
    Ok(j.transpose().mul(a).mul(&j))
}

/// Symmetric 2×2 matrices stored as [a11, a12, a22].
#[derive(Debug, Clone, Serialize)]
pub struct KernelField<T: Real> {
    pub a: Vec<[T; 3]>,
    pub lambda: T,
    pub lambda_max: T,
    pub s: T,
    pub holder_alpha: T,
    /// C^α norm of A: max over entries of sup + chordal seminorm.
    pub holder_norm: T,
    /// [A]_α alone; zero for constant fields.
    pub holder_seminorm: T,
}

impl<T: Real> KernelField<T> {
    pub fn from_matrices(a: Vec<[T; 3]>, s: T, alpha: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(FlowError::Domain(format!("s = {s} must lie in (0, 1)")));
        }
        let mut lambda = T::infinity();
        let mut lambda_max = T::zero();
        for m in &a {
            let tr = m[0] + m[2];
            let disc = ((m[0] - m[2]).powi(2) + T::lit(4.0) * m[1] * m[1]).sqrt();
            lambda = lambda.min(T::lit(0.5) * (tr - disc));
            lambda_max = lambda_max.max(T::lit(0.5) * (tr + disc));
        }
        if !(lambda > T::zero()) {
            return Err(FlowError::Domain("matrix field is not elliptic".into()));
        }
        // direction net of 32 unit vectors per node
        let slack = T::tol(1e-12) * lambda_max;
        for m in &a {
            for k in 0..32 {
                let xi = unit(T::TAU() * T::idx(k) / T::lit(32.0));
                let q = m[0] * xi[0] * xi[0] + T::lit(2.0) * m[1] * xi[0] * xi[1] + m[2] * xi[1] * xi[1];
                if q < lambda - slack || q > lambda_max + slack {
                    return Err(FlowError::Algebra("ellipticity bounds violated on the direction net".into()));
                }
            }
        }
        let mut semi = T::zero();
        let mut sup = T::zero();
        for c in 0..3 {
            let entry: Vec<T> = a.iter().map(|m| m[c]).collect();
            semi = semi.max(holder_seminorm(&entry, alpha));
            sup = sup.max(entry.iter().fold(T::zero(), |acc, v| acc.max(v.abs())));
        }
        Ok(Self { a, lambda, lambda_max, s, holder_alpha: alpha, holder_norm: sup + semi, holder_seminorm: semi })
    }

    pub fn constant(n: usize, c: T, s: T, alpha: T) -> Result<Self> {
        Self::from_matrices(vec![[c, T::zero(), c]; n], s, alpha)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn node(&self, i: usize) -> [T; 2] {
        unit(T::TAU() * T::idx(i) / T::idx(self.len()))
    }

    pub fn matrix(&self, i: usize) -> Matrix<T> {
        let m = self.a[i];
        Matrix::new(2, 2, vec![m[0], m[1], m[1], m[2]])
    }

    /// ‖v‖²_{A(x_i)}.
    pub fn quad(&self, i: usize, v: [T; 2]) -> T {
        let m = self.a[i];
        m[0] * v[0] * v[0] + T::lit(2.0) * m[1] * v[0] * v[1] + m[2] * v[1] * v[1]
    }

    fn exponent(&self) -> T {
        -(T::lit(2.0) + self.s) / T::lit(2.0)
    }
}

pub fn build_matrix_field<T: Real>(field: &HeightField<T>, s: T, alpha: T) -> Result<KernelField<T>> {
    let a = (0..field.len())
        .map(|i| {
            let h = field.values()[i];
            let th = field.angle(i);
            let g = [-field.d1()[i] * th.sin(), field.d1()[i] * th.cos()];
            [h * h + g[0] * g[0], g[0] * g[1], h * h + g[1] * g[1]]
        })
        .collect();
    KernelField::from_matrices(a, s, alpha)
}

/// K_A(y, x_i) for a point y on the circle.
pub fn kernel_eval<T: Real>(k: &KernelField<T>, y: [T; 2], node: usize) -> Result<T> {
    let d = sub(y, k.node(node));
    let q = k.quad(node, d);
    if !(q > T::zero()) {
        return Err(FlowError::Singularity(format!("kernel evaluated on the diagonal at node {node}")));
    }
    Ok(q.powf(k.exponent()))
}

fn kernel_nodes<T: Real>(k: &KernelField<T>, j: usize, i: usize) -> T {
    k.quad(i, sub(k.node(j), k.node(i))).powf(k.exponent())
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub seed: u64,
    pub samples: usize,
    pub empirical_constant: f64,
    pub pass: bool,
}

fn chord<T: Real>(n: usize, d: usize) -> T {
    T::lit(2.0) * (T::PI() * T::idx(d.min(n - d)) / T::idx(n)).sin()
}

/// Random triples (x, y, z) of node indices with 0 < |z−x| ≤ |y−x|/2.
fn sample_triples(n: usize, count: usize, seed: u64) -> Vec<(usize, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = rng.gen_range(0..n);
        let oy = rng.gen_range(1..n);
        let dy = chord::<f64>(n, oy);
        let max_o = (1..=n / 2).take_while(|&o| chord::<f64>(n, o) <= 0.5 * dy).last();
        let Some(max_o) = max_o else { continue };
        let oz = rng.gen_range(1..=max_o);
        let z = if rng.gen_bool(0.5) { (x + oz) % n } else { (x + n - oz) % n };
        out.push((x, (x + oy) % n, z));
    }
    out
}

fn lemma_constants<T: Real>(k: &KernelField<T>, triples: &[(usize, usize, usize)]) -> (f64, f64) {
    let n = k.len();
    let s = k.s;
    let alpha = k.holder_alpha;
    // the |z−x|^α term comes from the variation of A; weight it by [A]_α/λ
    let w2 = k.holder_seminorm / k.lambda;
    triples
        .par_iter()
        .map(|&(x, y, z)| {
            let dyx: T = chord(n, (y + n - x) % n);
            let dzx: T = chord(n, (z + n - x) % n);
            let kyx = kernel_nodes(k, y, x);
            let c1 = kyx * dyx.powf(T::lit(2.0) + s);
            let diff = (kernel_nodes(k, y, z) - kyx).abs();
            let bound = dzx / dyx.powf(T::lit(3.0) + s) + w2 * dzx.powf(alpha) / dyx.powf(T::lit(2.0) + s);
            (c1.f64(), (diff / bound).f64())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

/// Empirical constants of the kernel lemma: (i) K_A·|y−x|^{n+1+s} and (ii)
/// the increment bound. Passes when the constant is finite and grows by
/// less than 2× when the sample is doubled.
pub fn verify_kernel_lemma<T: Real>(k: &KernelField<T>, seed: u64, samples: usize) -> Vec<LemmaReport> {
    let triples = sample_triples(k.len(), 2 * samples, seed);
    let (a1, a2) = lemma_constants(k, &triples[..samples]);
    let (b1, b2) = lemma_constants(k, &triples);
    let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && b < 2.0 * a.max(f64::MIN_POSITIVE);
    vec![
        LemmaReport { lemma: "kernel_bound".into(), seed, samples, empirical_constant: b1, pass: ok(a1, b1) },
        LemmaReport { lemma: "kernel_increment".into(), seed, samples, empirical_constant: b2, pass: ok(a2, b2) },
    ]
}

/// Taylor remainder and g_h of the height field on grid pairs.
#[derive(Debug, Clone)]
pub struct SplitData<T: Real> {
    h: Vec<T>,
    grad: Vec<[T; 2]>,
    pts: Vec<[T; 2]>,
    kernel: KernelField<T>,
    /// max |g_h| / |y−x|^{2+s+α} over all pairs
    pub growth_constant: T,
    /// max |g_h(y,z) − g_h(y,x)| / (|z−x|^{s+α}|y−x|²) over sampled triples
    pub increment_constant: T,
    /// worst identity residual over the 64×64 check
    pub identity_residual: T,
}

impl<T: Real> SplitData<T> {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn kernel(&self) -> &KernelField<T> {
        &self.kernel
    }

    /// T_x[h](y) = h(y) − h(x) − ⟨∇_τh(x), y−x⟩.
    pub fn taylor(&self, y: usize, x: usize) -> T {
        self.h[y] - self.h[x] - dot(self.grad[x], sub(self.pts[y], self.pts[x]))
    }

    pub fn g(&self, y: usize, x: usize) -> T {
        let t = self.taylor(y, x);
        let dh = self.h[y] - self.h[x];
        let d2 = dot(sub(self.pts[y], self.pts[x]), sub(self.pts[y], self.pts[x]));
        self.h[x] * dh * d2 + T::lit(2.0) * dh * t - t * t
    }

    /// |h(y)y − h(x)x|² − ‖y−x‖²_{A(x)} − g_h(y, x).
    pub fn residual(&self, y: usize, x: usize) -> T {
        let (py, px) = (self.pts[y], self.pts[x]);
        let ey = [self.h[y] * py[0], self.h[y] * py[1]];
        let ex = [self.h[x] * px[0], self.h[x] * px[1]];
        let lhs = dot(sub(ey, ex), sub(ey, ex));
        lhs - self.kernel.quad(x, sub(py, px)) - self.g(y, x)
    }

    pub fn distance(&self, y: usize, x: usize) -> T {
        norm(sub(self.pts[y], self.pts[x]))
    }
}

pub fn split_data<T: Real>(field: &HeightField<T>, s: T, alpha: T) -> Result<SplitData<T>> {
    let n = field.len();
    let kernel = build_matrix_field(field, s, alpha)?;
    let pts: Vec<[T; 2]> = (0..n).map(|i| unit(field.angle(i))).collect();
    let grad = (0..n)
        .map(|i| {
            let th = field.angle(i);
            [-field.d1()[i] * th.sin(), field.d1()[i] * th.cos()]
        })
        .collect();
    let mut sd = SplitData {
        h: field.values().to_vec(),
        grad,
        pts,
        kernel,
        growth_constant: T::zero(),
        increment_constant: T::zero(),
        identity_residual: T::zero(),
    };
    let step = (n / 64).max(1);
    let idx: Vec<usize> = (0..n).step_by(step).take(64).collect();
    let mut worst = T::zero();
    for &x in &idx {
        for &y in &idx {
            worst = worst.max(sd.residual(y, x).abs());
        }
    }
    if worst > T::tol(1e-10) {
        return Err(FlowError::Algebra(format!("splitting identity residual {worst:e}")));
    }
    sd.identity_residual = worst;
    let p = T::lit(2.0) + s + alpha;
    sd.growth_constant = (0..n)
        .flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (y, x)))
        .map(|(y, x)| sd.g(y, x).abs() / sd.distance(y, x).powf(p))
        .fold(T::zero(), T::max);
    let sa = s + alpha;
    sd.increment_constant = sample_triples(n, 4096, 0x5eed)
        .into_iter()
        .map(|(x, y, z)| {
            (sd.g(y, z) - sd.g(y, x)).abs() / (sd.distance(z, x).powf(sa) * sd.distance(y, x).powi(2))
        })
        .fold(T::zero(), T::max);
    Ok(sd)
}

/// Log–log slope of max|G| over pairs at node offsets {1, 2, 4, 8}.
pub fn growth_exponent<T: Real>(n: usize, f: impl Fn(usize, usize) -> T) -> T {
    let offsets = [1usize, 2, 4, 8];
    let pts: Vec<(T, T)> = offsets
        .iter()
        .map(|&o| {
            let m = (0..n).map(|x| f((x + o) % n, x).abs().max(f((x + n - o) % n, x).abs())).fold(T::zero(), T::max);
            (chord::<T>(n, o).ln(), m.ln())
        })
        .collect();
    let k = T::idx(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone)]
pub struct ConvolutionResult<T: Real> {
    pub values: Vec<T>,
    pub holder_norm: T,
    pub growth_exponent: T,
    /// growth |F(y,x)| ≲ |y−x|^{1+s+α} seen near the diagonal
    pub precondition_ok: bool,
}

/// ψ(x_i) = Σ_{j≠i} F(y_j, x_i) K_A(y_j, x_i) Δθ and its discrete C^α
/// norm. F receives node indices (y, x).
pub fn convolution_functional<T: Real>(
    f: impl Fn(usize, usize) -> T + Sync,
    k: &KernelField<T>,
) -> ConvolutionResult<T> {
    let n = k.len();
    let dth = T::TAU() / T::idx(n);
    let values: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..n {
                if j != i {
                    acc = acc + f(j, i) * kernel_nodes(k, j, i);
                }
            }
            acc * dth
        })
        .collect();
    let sup = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let holder_norm = sup + holder_seminorm(&values, k.holder_alpha);
    let all_zero = (0..n).all(|x| (1..=8).all(|o| f((x + o) % n, x) == T::zero()));
    let p = growth_exponent(n, &f);
    let need = T::one() + k.s + k.holder_alpha - T::lit(0.1);
    ConvolutionResult { values, holder_norm, growth_exponent: p, precondition_ok: all_zero || p >= need }
}

/// G_μ = d/dμ (a/(a + μg))^q = −q g a^q (a + μg)^{−q−1}, a = ‖y−x‖²_A.
pub fn g_mu<T: Real>(a: T, g: T, q: T, mu: T) -> T {
    -q * g * a.powf(q) * (a + mu * g).powf(-q - T::one())
}

/// ∫_0^1 G_μ dμ = (a/(a+g))^q − 1.
pub fn r0_weight<T: Real>(a: T, g: T, q: T) -> T {
    (a / (a + g)).powf(q) - T::one()
}

/// Per-node terms of the parametrized derivative along
/// X = hτ_i + ∇_ih·x for the ambient axis i, all with the same PV rule so
/// that direct = −leading + r1 and leading = linear + r0 hold discretely.
#[derive(Debug, Clone)]
pub struct PdeTerms<T: Real> {
    pub direct: Vec<T>,
    pub leading: Vec<T>,
    pub r1: Vec<T>,
    pub linear: Vec<T>,
    pub r0: Vec<T>,
}

pub fn pde_terms<T: Real>(field: &HeightField<T>, s: T, c_ns: T, axis: usize) -> Result<PdeTerms<T>> {
    if axis > 1 {
        return Err(FlowError::Domain("axis must be 0 or 1".into()));
    }
    let sd = split_data(field, s, s.min(T::one() - s) / T::lit(2.0))?;
    let n = field.len();
    let dth = field.spacing();
    let h = field.values();
    let x: Vec<[T; 2]> = (0..n).map(|i| unit(field.angle(i))).collect();
    let eta: Vec<[T; 2]> = (0..n).map(|i| field.point(i)).collect();
    let gi: Vec<T> = sd.grad.iter().map(|g| g[axis]).collect();
    let tau = |i: usize| {
        let mut t = [-x[i][axis] * x[i][0], -x[i][axis] * x[i][1]];
        t[axis] = t[axis] + T::one();
        t
    };
    // ν̃(y) = h(y)y − ∇_τh(y) = ν J for curves
    let nut: Vec<[T; 2]> = (0..n).map(|j| sub(eta[j], sd.grad[j])).collect();
    let q = (T::lit(2.0) + s) / T::lit(2.0);
    let zero = T::zero();
    let pv = |i: usize, f: &dyn Fn(usize) -> T| hypersingular_pv(n, i, dth, s, 1, zero, f);

    let rows: Vec<[T; 5]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let dist = |j: usize| norm(sub(eta[j], eta[i])).powf(-(T::lit(2.0) + s));
            let ti = tau(i);
            let xv = [h[i] * ti[0] + gi[i] * x[i][0], h[i] * ti[1] + gi[i] * x[i][1]];
            let direct = pv(i, &|j| dot(xv, nut[j]) * dist(j));
            let leading = pv(i, &|j| (gi[j] - gi[i]) * h[j] * dist(j));
            let r1 = pv(i, &|j| {
                let tj = tau(j);
                let a = [h[i] * ti[0] - h[j] * tj[0], h[i] * ti[1] - h[j] * tj[1]];
                (dot(a, nut[j]) + dot(sub(x[i], x[j]), nut[j]) * gi[i]) * dist(j)
            });
            let anorm = |j: usize| sd.kernel.quad(i, sub(x[j], x[i]));
            let linear = pv(i, &|j| (gi[j] - gi[i]) * h[j] * anorm(j).powf(-q));
            let r0 = pv(i, &|j| {
                let a = anorm(j);
                (gi[j] - gi[i]) * h[j] * a.powf(-q) * r0_weight(a, sd.g(j, i), q)
            });
            [c_ns * direct, c_ns * leading, c_ns * r1, c_ns * linear, c_ns * r0]
        })
        .collect();
    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<T>>();
    Ok(PdeTerms { direct: col(0), leading: col(1), r1: col(2), linear: col(3), r0: col(4) })
}

/// The chordal metric used for all Hölder quantities on the circle.
pub fn circle_metric<T: Real>() -> Metric<T> {
    Metric::Chordal
}
