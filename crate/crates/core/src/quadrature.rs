//! Gauss rules, the Riemann zeta function, and the zeta-corrected
//! trapezoid used for the weakly and strongly singular periodic integrals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Nodes and weights on [-1, 1] for the weight (1-x)^alpha (1+x)^beta.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate f against the rule's weight on [-1, 1].
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Integrate f over [a, b] (unweighted rules only make sense here).
    pub fn integrate_on(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|x| f(mid + half * x))
    }
}

type RuleKey = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Gauss–Jacobi rule, cached per (n, alpha, beta). Requires alpha, beta > -1.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Arc<GaussRule> {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let key = (n, alpha.to_bits(), beta.to_bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(build_jacobi(n, alpha, beta));
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

fn build_jacobi(n: usize, a: f64, b: f64) -> GaussRule {
    // Golub–Welsch for starting values, then Newton on P_n and the
    // closed-form weights, which keeps full relative accuracy near ±1.
    let mut jm = DMatrix::<f64>::zeros(n, n);
    let ab = a + b;
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let off2 = if m == 1.0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * m * (m + a) * (m + b) * (m + ab)
                    / ((2.0 * m + ab).powi(2) * (2.0 * m + ab + 1.0) * (2.0 * m + ab - 1.0))
            };
            jm[(k, k + 1)] = off2.sqrt();
            jm[(k + 1, k)] = off2.sqrt();
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let lognorm = ln_gamma(n as f64 + a + 1.0) + ln_gamma(n as f64 + b + 1.0)
        - ln_gamma(n as f64 + ab + 1.0)
        - ln_gamma(n as f64 + 1.0)
        + (ab + 1.0) * std::f64::consts::LN_2;
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            let (p, dp) = jacobi_with_derivative(n, a, b, *x);
            let dx = p / dp;
            *x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = jacobi_with_derivative(n, a, b, *x);
        weights.push((lognorm - ((1.0 - *x * *x) * dp * dp).ln()).exp());
    }
    GaussRule { nodes, weights }
}

/// P_n^{(a,b)}(x) and its derivative.
fn jacobi_with_derivative(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let ab = a + b;
    let mut p0 = 1.0;
    let mut p1 = 0.5 * (a - b) + 0.5 * (ab + 2.0) * x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + ab;
        let p2 = ((c - 1.0) * (c * (c - 2.0) * x + a * a - b * b) * p1
            - 2.0 * (k + a - 1.0) * (k + b - 1.0) * c * p0)
            / (2.0 * k * (k + ab) * (c - 2.0));
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let c = 2.0 * nf + ab;
    let dp = (nf * ((a - b) - c * x) * p1 + 2.0 * (nf + a) * (nf + b) * p0) / (c * (1.0 - x * x));
    (p1, dp)
}

const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Riemann zeta for real z != 1 by Euler–Maclaurin summation.
pub fn zeta(z: f64) -> f64 {
    assert!(z != 1.0, "zeta has a pole at 1");
    let m = 24usize;
    let mf = m as f64;
    let mut sum: f64 = (1..m).map(|k| (k as f64).powf(-z)).sum();
    sum += mf.powf(1.0 - z) / (z - 1.0) + 0.5 * mf.powf(-z);
    // B_{2j}/(2j)! * z(z+1)...(z+2j-2) * m^{-z-2j+1}
    let mut rising = z;
    let mut fact = 2.0;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let p = 2 * j + 1;
        sum += b / fact * rising * mf.powf(-z - p as f64);
        let pf = p as f64;
        rising *= (z + pf) * (z + pf + 1.0);
        fact *= (pf + 2.0) * (pf + 3.0);
    }
    sum
}

/// Correction to the punctured trapezoid sum h·Σ_{j≠0} f(jh) for
/// f(t) = |t|^gamma · m(t) with m smooth: adds
/// -2 Σ_k ζ(-gamma-2k) m^{(2k)}(0)/(2k)! h^{2k+1+gamma}.
/// `even_derivs[k]` holds m^{(2k)}(0).
pub fn punctured_correction(gamma: f64, h: f64, even_derivs: &[f64]) -> f64 {
    let mut fact = 1.0;
    let mut out = 0.0;
    for (k, d) in even_derivs.iter().enumerate() {
        if k > 0 {
            fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        }
        let order = 2 * k as i32;
        out -= 2.0 * zeta(-gamma - order as f64) * d / fact * h.powf(order as f64 + 1.0 + gamma);
    }
    out
}

/// m''(0) from samples m(±h), m(±2h) and m(0), fourth-order central stencil.
pub fn second_derivative_at_zero(m0: f64, m1: [f64; 2], m2: [f64; 2], h: f64) -> f64 {
    (-(m2[0] + m2[1]) + 16.0 * (m1[0] + m1[1]) - 30.0 * m0) / (12.0 * h * h)
}
