//! Sparse storage and iterative solvers.

pub mod amg;
pub mod cg;
pub mod dense;
pub mod eigen;
pub mod minres;
pub mod sparse;

use std::time::Instant;

pub use amg::{AmgHierarchy, AmgParams, Cycle};
pub use cg::{cg_solve, SolverOptions};
pub use dense::DenseLu;
pub use eigen::{extremal_eigs, Which};
pub use minres::minres_solve;
pub use sparse::{Csr, SparseSym};

/// Symmetric positive definite approximation of `A^{-1}`.
pub trait Preconditioner<T>: Sync {
    fn apply(&self, r: &[T], z: &mut [T]);
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Relative residuals, starting with the initial one.
    pub residual_history: Vec<T>,
    pub solve_seconds: f64,
}

impl<T> SolveReport<T> {
    fn new(x: Vec<T>, iterations: usize, residual_history: Vec<T>, start: Instant) -> Self {
        Self {
            x,
            iterations,
            residual_history,
            solve_seconds: start.elapsed().as_secs_f64(),
        }
    }
}
