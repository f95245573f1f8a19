use thiserror::Error;

/// Errors raised by geometry queries, assembly and the iterative solvers.
///
/// Coordinates and residuals are reported as `f64` whatever the working
/// scalar type is.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EbError {
    #[error("no sign change of the level set in bracket [{lo}, {hi}]")]
    NoIntersection { lo: f64, hi: f64 },

    #[error("root finder did not converge after {iterations} iterations (|psi| = {residual:e})")]
    RootNotConverged { iterations: usize, residual: f64 },

    #[error("closest point iteration did not converge at ({x}, {y}), |psi| = {residual:e}")]
    ClosestPointNotConverged { x: f64, y: f64, residual: f64 },

    #[error("degenerate level-set samples: psi_in == psi_out")]
    DegenerateSample,

    #[error("ray from ({x}, {y}) does not meet the boundary inside the box")]
    RayMiss { x: f64, y: f64 },

    #[error("geometry touches the grid boundary at grid point ({i}, {j})")]
    TouchesGridBoundary { i: usize, j: usize },

    #[error("degenerate interpolation stencil at boundary point ({x}, {y})")]
    DegenerateStencil { x: f64, y: f64 },

    #[error("singular dense system (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("no computational points in the grid")]
    EmptySystem,

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("{method} did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("CG breakdown at iteration {iteration}: p'Ap = {curvature:e} <= 0; matrix is not positive definite, use MINRES")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("time stepping became unstable at step {step}: max |u| = {max_abs:e}")]
    Unstable { step: usize, max_abs: f64 },
}

pub type Result<T, E = EbError> = std::result::Result<T, E>;
