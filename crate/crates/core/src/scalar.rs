use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::num_complex::Complex;

/// Floating-point scalar used throughout the crate.
///
/// FFTs are dispatched per concrete type so that generic code never sees
/// both `Float` and `Signed` in the same bound (their `abs` collide).
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static
{
    /// In-place unnormalized FFT (forward uses e^{-ikθ}).
    fn fft(buf: &mut [Complex<Self>], inverse: bool);

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits the scalar type")
    }

    fn idx(i: usize) -> Self {
        Self::from_usize(i).expect("index fits the scalar type")
    }

    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance floor scaled to the precision of the type.
    fn tol(t: f64) -> Self {
        Self::lit(t).max(Self::epsilon() * Self::lit(16.0))
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn fft(buf: &mut [Complex<Self>], inverse: bool) {
                use std::cell::RefCell;
                use rustfft::FftPlanner;
                thread_local! {
                    static PLANNER: RefCell<FftPlanner<$t>> = RefCell::new(FftPlanner::new());
                }
                let plan = PLANNER.with(|p| {
                    let mut p = p.borrow_mut();
                    if inverse {
                        p.plan_fft_inverse(buf.len())
                    } else {
                        p.plan_fft_forward(buf.len())
                    }
                });
                plan.process(buf);
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

pub(crate) fn dot<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm<T: Real>(a: [T; 2]) -> T {
    a[0].hypot(a[1])
}

pub(crate) fn sub<T: Real>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn unit<T: Real>(theta: T) -> [T; 2] {
    [theta.cos(), theta.sin()]
}
