//! Time integration for the wave and heat equations.

pub mod bessel;
pub mod heat;
pub mod wave;

pub use bessel::{bessel_j, bessel_zero, standing_mode, KAPPA_77};
pub use heat::CrankNicolson;
pub use wave::{leapfrog_energy, ThetaScheme};

use crate::linalg::{AmgHierarchy, AmgParams, Cycle, SparseSym};
use crate::Real;

/// Number of steps and the adjusted step so that `steps * dt == t_end`.
pub fn uniform_steps<T: Real>(t_end: T, dt_target: T) -> (usize, T) {
    let steps = (t_end / dt_target).ceil().as_f64().max(1.0) as usize;
    (steps, t_end / T::of(steps))
}

/// `I + c A` with its AMG hierarchy.
#[derive(Debug, Clone)]
pub(crate) struct ImplicitOperator<T> {
    pub(crate) m: SparseSym<T>,
    pub(crate) amg: AmgHierarchy<T>,
}

impl<T: Real> ImplicitOperator<T> {
    pub(crate) fn new(a: &SparseSym<T>, c: T, cycle: Cycle) -> crate::Result<Self> {
        let m = a.affine(c, T::one());
        let amg = AmgHierarchy::setup(&m, cycle, AmgParams::default())?;
        Ok(Self { m, amg })
    }
}
