//! Crank-Nicolson for `u_t = L u + f`.

use super::ImplicitOperator;
use crate::error::{EbError, Result};
use crate::linalg::{cg_solve, Cycle, SolverOptions, SparseSym};
use crate::Real;

/// Solves `(I + c A) u^{n+1} = (I - c A) u^n + c (g^n + g^{n+1}) + dt (f^n + f^{n+1}) / 2`
/// with `c = dt / (2 h^2)`, warm-starting CG from `u^n`.
#[derive(Debug, Clone)]
pub struct CrankNicolson<T> {
    pub dt: T,
    c: T,
    a: SparseSym<T>,
    implicit: ImplicitOperator<T>,
    tol: T,
    u: Vec<T>,
    g: Vec<T>,
    f: Vec<T>,
    steps: usize,
    iterations: Vec<usize>,
}

impl<T: Real> CrankNicolson<T> {
    pub fn new(a: &SparseSym<T>, h: T, dt: T, u0: Vec<T>, g0: Vec<T>, f0: Vec<T>, cycle: Cycle) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(EbError::Contract("Crank-Nicolson needs dt > 0".into()));
        }
        let n = a.dim();
        if u0.len() != n || g0.len() != n || f0.len() != n {
            return Err(EbError::Contract("initial data has the wrong length".into()));
        }
        let c = dt / (T::lit(2.0) * h * h);
        Ok(Self {
            dt,
            c,
            a: a.clone(),
            implicit: ImplicitOperator::new(a, c, cycle)?,
            tol: T::lit(1e-12),
            u: u0,
            g: g0,
            f: f0,
            steps: 0,
            iterations: Vec::new(),
        })
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn current(&self) -> &[T] {
        &self.u
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn iterations(&self) -> &[usize] {
        &self.iterations
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
        }
    }

    /// Advances one step given boundary data and source at the new level.
    pub fn step(&mut self, g_next: &[T], f_next: &[T]) -> Result<&[T]> {
        let n = self.u.len();
        let au = self.a.mul_vec(&self.u);
        let half_dt = self.dt * T::lit(0.5);
        let rhs: Vec<T> = (0..n)
            .map(|k| {
                self.u[k] - self.c * au[k] + self.c * (self.g[k] + g_next[k]) + half_dt * (self.f[k] + f_next[k])
            })
            .collect();
        let opts = SolverOptions::capped(self.tol, n, 10.0);
        let sol = cg_solve(&self.implicit.m, &rhs, Some(&self.u), Some(&self.implicit.amg), opts)?;
        self.iterations.push(sol.iterations);
        self.steps += 1;
        self.u = sol.x;
        self.g = g_next.to_vec();
        self.f = f_next.to_vec();
        Ok(&self.u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Csr;

    #[test]
    fn scalar_amplification() {
        // u' = -a u with h = 1
        for (a, dt) in [(2.0f64, 0.1), (5.0, 1.0), (0.5, 3.0)] {
            let op = SparseSym::new(Csr::from_triplets(1, 1, &[(0, 0, a)])).unwrap();
            let mut s = CrankNicolson::new(&op, 1.0, dt, vec![1.0], vec![0.0], vec![0.0], Cycle::V).unwrap();
            let ratio = s.step(&[0.0], &[0.0]).unwrap()[0];
            let lambda = -a;
            let expect = (1.0 + dt * lambda / 2.0) / (1.0 - dt * lambda / 2.0);
            assert!((ratio - expect).abs() < 1e-12, "{ratio} vs {expect}");
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseSym::new(Csr::from_triplets(n, n, &t)).unwrap();
        let h = 0.1;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.2).cos()).collect();
        let g = vec![0.0; n];
        // L u = (g - A u) / h^2 = -f
        let f: Vec<f64> = a.mul_vec(&u).iter().map(|v| v / (h * h)).collect();
        let mut s = CrankNicolson::new(&a, h, 0.05, u.clone(), g.clone(), f.clone(), Cycle::V).unwrap();
        for _ in 0..5 {
            s.step(&g, &f).unwrap();
        }
        for (p, q) in s.current().iter().zip(&u) {
            assert!((p - q).abs() < 1e-10);
        }
    }
}
