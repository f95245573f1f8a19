//! Boundary value problem description: geometry, coefficient, data.

use std::fmt;
use std::sync::Arc;

use crate::geometry::Geometry;
use crate::Real;

/// Space-time field `(x, y, t) -> value`.
pub type Field<T> = Arc<dyn Fn(T, T, T) -> T + Send + Sync>;

/// Conductivity `beta`.
#[derive(Clone)]
pub enum Coefficient<T: Real> {
    Constant(T),
    Variable(Arc<dyn Fn(T, T) -> T + Send + Sync>),
}

impl<T: Real> Coefficient<T> {
    pub fn variable(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Coefficient::Variable(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: T, y: T) -> T {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Variable(f) => f(x, y),
        }
    }

    pub fn constant(&self) -> Option<T> {
        match self {
            Coefficient::Constant(c) => Some(*c),
            Coefficient::Variable(_) => None,
        }
    }
}

impl<T: Real> fmt::Debug for Coefficient<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Variable(_) => f.write_str("Variable(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation<T> {
    /// `div(beta grad u) = f`
    Poisson,
    /// `div(beta grad u) + omega^2 u = f`
    Helmholtz { omega: T },
    /// `u_t = div(beta grad u) + f`
    Heat,
    /// `u_tt = div(beta grad u) + f`
    Wave,
}

/// Geometry plus the coefficient, source and Dirichlet data of one problem.
#[derive(Clone)]
pub struct ProblemSpec<T: Real> {
    pub geometry: Geometry<T>,
    pub beta: Coefficient<T>,
    pub source: Field<T>,
    pub boundary: Field<T>,
    pub equation: Equation<T>,
}

impl<T: Real> ProblemSpec<T> {
    pub fn new(
        geometry: Geometry<T>,
        beta: Coefficient<T>,
        source: impl Fn(T, T, T) -> T + Send + Sync + 'static,
        boundary: impl Fn(T, T, T) -> T + Send + Sync + 'static,
        equation: Equation<T>,
    ) -> Self {
        Self {
            geometry,
            beta,
            source: Arc::new(source),
            boundary: Arc::new(boundary),
            equation,
        }
    }

    /// Steady Poisson problem with time-independent data.
    pub fn poisson(
        geometry: Geometry<T>,
        beta: Coefficient<T>,
        source: impl Fn(T, T) -> T + Send + Sync + 'static,
        boundary: impl Fn(T, T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            geometry,
            beta,
            move |x, y, _| source(x, y),
            move |x, y, _| boundary(x, y),
            Equation::Poisson,
        )
    }

    pub fn with_equation(mut self, equation: Equation<T>) -> Self {
        self.equation = equation;
        self
    }

    #[inline]
    pub fn f(&self, x: T, y: T, t: T) -> T {
        (self.source)(x, y, t)
    }

    #[inline]
    pub fn u_d(&self, x: T, y: T, t: T) -> T {
        (self.boundary)(x, y, t)
    }
}

impl<T: Real> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("geometry", &self.geometry)
            .field("beta", &self.beta)
            .field("equation", &self.equation)
            .finish_non_exhaustive()
    }
}
