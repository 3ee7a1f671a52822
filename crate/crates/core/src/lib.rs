//! Contour dynamics for the generalized SQG family of active scalars.
//!
//! A scalar `θ = Σ_j μ_j 1_{Θ_j}` is carried by its closed level curves;
//! the velocity `u = ∇^⊥K ∗ θ` with `K(x) = −c_α / (2α|x|^{2α})` is evaluated
//! by contour quadrature, the curves are advanced by RK4, and regularity
//! functionals of the level-set family are monitored along the way.
//!
//! Everything is generic over the scalar type through [`Real`]; the aliases
//! below fix it to `f64`.

// `!(x > 0)` is used on purpose: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evolution;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod layercake;
pub mod quadrature;
pub mod scalar;
pub mod spline;
pub mod velocity;
pub mod vec2;

pub use geometry::{ClosedCurve, GeometryError, SimplicityReport, Winding};
pub use scalar::Real;
pub use vec2::{Bilinear2, Mat2, Vec2};

pub type Point = Vec2<f64>;
pub type Curve = ClosedCurve<f64>;
pub type Alpha = kernel::AlphaParam<f64>;
pub type Kernel = kernel::Kernel<f64>;
pub type Cake = layercake::LayerCake<f64>;
pub type Component = layercake::LevelComponent<f64>;
pub type Grid = layercake::ScalarGrid<f64>;
pub type Diagnostics = layercake::Diagnostics<f64>;
pub type Field<'a> = velocity::VelocityField<'a, f64>;
pub type Settings = velocity::VelocitySettings<f64>;
pub type State = evolution::SimState<f64>;
pub type Config = evolution::EvolutionConfig<f64>;
