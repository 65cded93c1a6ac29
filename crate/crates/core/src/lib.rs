//! Numerical laboratory for isothermally asymptotic surfaces.
//!
//! Solutions `(p, V, W)` of the stationary modified Veselov-Novikov system
//! are generated from closed-form and ODE-driven families, mapped to
//! stationary Veselov-Novikov data `(u, v, w)` by a Bäcklund transformation,
//! and turned into surfaces in 3-space along two independent routes: the
//! homogeneous coordinates of the Wilczynski linear system and the Lelieuvre
//! integral of the affine conormal. Every identity is checked through
//! 4th-order finite-difference residuals.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`, which is what the accuracy targets assume.

pub mod backlund;
pub mod connection;
pub mod error;
pub mod families;
pub mod fields;
mod real;
pub mod surfaces;

pub use error::{Error, ErrorKind, Result};
pub use real::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Grid = fields::GridSpec<f64>;
pub type Field = fields::ScalarField<f64>;
pub type Solution = families::MvnSolution<f64>;
pub type VnSolution = backlund::VnSolution<f64>;
pub type Mesh = surfaces::SurfaceMesh<f64>;
