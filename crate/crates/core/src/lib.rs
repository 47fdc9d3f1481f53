//! Volume-preserving fractional mean curvature flow of convex planar sets,
//! represented by height functions over the unit circle.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiation.

pub mod curvature;
pub mod error;
pub mod flow;
pub mod fourier;
pub mod geometry;
pub mod kernels;
pub mod norms;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod shapes;
pub mod spectral;

pub use error::{FlowError, Result};
pub use scalar::Real;

pub type HeightField64 = geometry::HeightField<f64>;
pub type HeightField32 = geometry::HeightField<f32>;
pub type CurvatureSample64 = curvature::CurvatureSample<f64>;
pub type ShapeMetrics64 = geometry::ShapeMetrics<f64>;
pub type KernelField64 = kernels::KernelField<f64>;
pub type Matrix64 = kernels::Matrix<f64>;
pub type SpectralState64 = spectral::SpectralState<f64>;
pub type FlowConfig64 = flow::FlowConfig<f64>;
pub type FlowState64 = flow::FlowState<f64>;
pub type FlowTrace64 = flow::FlowTrace<f64>;
