//! Periodic spectral helpers on uniform grids of [0, 2π).

use rustfft::num_complex::Complex;

use crate::scalar::Real;

pub fn forward<T: Real>(values: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
    T::fft(&mut buf, false);
    buf
}

/// Inverse transform including the 1/N normalization; returns real parts.
pub fn inverse_real<T: Real>(mut spec: Vec<Complex<T>>) -> Vec<T> {
    let n = T::idx(spec.len());
    T::fft(&mut spec, true);
    spec.into_iter().map(|c| c.re / n).collect()
}

/// Signed wavenumber of FFT bin `i`; the Nyquist bin is reported as +N/2.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// `order`-th derivative of the trigonometric interpolant at the grid nodes.
/// The Nyquist mode is the symmetric cosine, whose odd derivatives vanish on
/// the grid.
pub fn derivative<T: Real>(values: &[T], order: u32) -> Vec<T> {
    let mut spec = forward(values);
    apply_derivative(&mut spec, order);
    inverse_real(spec)
}

pub fn apply_derivative<T: Real>(spec: &mut [Complex<T>], order: u32) {
    let n = spec.len();
    for (i, c) in spec.iter_mut().enumerate() {
        let k = wavenumber(i, n);
        if order % 2 == 1 && n % 2 == 0 && i == n / 2 {
            *c = Complex::new(T::zero(), T::zero());
            continue;
        }
        let kf = T::lit(k as f64);
        // (ik)^order
        let mag = kf.powi(order as i32);
        let factor = match order % 4 {
            0 => Complex::new(mag, T::zero()),
            1 => Complex::new(T::zero(), mag),
            2 => Complex::new(-mag, T::zero()),
            _ => Complex::new(T::zero(), -mag),
        };
        *c = *c * factor;
    }
}

/// Multiply each mode by `w(|k|)` and transform back.
pub fn filter<T: Real>(values: &[T], w: impl Fn(usize) -> T) -> Vec<T> {
    let n = values.len();
    let mut spec = forward(values);
    for (i, c) in spec.iter_mut().enumerate() {
        let k = wavenumber(i, n).unsigned_abs() as usize;
        *c = *c * w(k);
    }
    inverse_real(spec)
}

/// Fraction of spectral energy carried by modes with |k| > cutoff.
pub fn energy_above<T: Real>(values: &[T], cutoff: usize) -> T {
    let n = values.len();
    let spec = forward(values);
    let mut total = T::zero();
    let mut high = T::zero();
    for (i, c) in spec.iter().enumerate() {
        let e = c.norm_sqr();
        total = total + e;
        if wavenumber(i, n).unsigned_abs() as usize > cutoff {
            high = high + e;
        }
    }
    if total == T::zero() {
        T::zero()
    } else {
        high / total
    }
}

/// Real trigonometric interpolant Σ_{k=0}^{N/2} Re(c_k e^{ikθ}), evaluated
/// off-grid by Horner's rule in e^{iθ}.
#[derive(Debug, Clone)]
pub struct TrigInterpolant<T: Real> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> TrigInterpolant<T> {
    pub fn new(values: &[T]) -> Self {
        let n = values.len();
        let spec = forward(values);
        let nf = T::idx(n);
        let two = T::lit(2.0);
        let half = n / 2;
        let coeffs = (0..=half)
            .map(|k| {
                if k == 0 {
                    spec[0] / nf
                } else if k == half && n % 2 == 0 {
                    Complex::new(spec[k].re / nf, T::zero())
                } else {
                    spec[k] * two / nf
                }
            })
            .collect();
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value and first derivative at angle θ.
    pub fn eval(&self, theta: T) -> (T, T) {
        let z = Complex::new(theta.cos(), theta.sin());
        let mut p = Complex::new(T::zero(), T::zero());
        let mut dp = Complex::new(T::zero(), T::zero());
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            p = p * z + c;
            dp = dp * z + c * T::idx(k);
        }
        // derivative of Re(Σ c_k z^k) is Re(i Σ k c_k z^k) = -Im(...)
        (p.re, -dp.im)
    }

    pub fn value(&self, theta: T) -> T {
        let z = Complex::new(theta.cos(), theta.sin());
        let mut p = Complex::new(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            p = p * z + c;
        }
        p.re
    }
}
