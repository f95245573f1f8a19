//! Embedded boundary finite differences on uniform Cartesian grids.
//!
//! Dirichlet problems for `div(beta grad u)` on curved 2D domains are
//! discretized with the five-point stencil; grid points just inside the
//! boundary are eliminated by line-by-line or RBF interpolation so that only
//! diagonal entries change and the system stays symmetric. The resulting
//! matrices are solved with AMG-preconditioned CG (or MINRES when indefinite).

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod interpolation;
pub mod linalg;
pub mod problem;
mod scalar;
pub mod spd;
pub mod timestepping;

pub use error::{EbError, Result};
pub use geometry::{Axis, Geometry, Point};
pub use grid::{Classification, Grid, GridContext, Mask, PointTag, Segment};
pub use problem::{Coefficient, Equation, ProblemSpec};
pub use scalar::Real;

pub type Geometry64 = Geometry<f64>;
pub type Geometry32 = Geometry<f32>;
pub type Point64 = Point<f64>;
pub type Grid64 = Grid<f64>;
pub type GridContext64 = GridContext<f64>;
pub type ProblemSpec64 = ProblemSpec<f64>;
pub type Grid32 = Grid<f32>;
pub type ProblemSpec32 = ProblemSpec<f32>;
pub type OperatorSystem64 = assembly::OperatorSystem<f64>;
pub type OperatorSystem32 = assembly::OperatorSystem<f32>;
pub type SparseSym64 = linalg::SparseSym<f64>;
pub type AmgHierarchy64 = linalg::AmgHierarchy<f64>;
