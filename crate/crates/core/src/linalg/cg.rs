//! Preconditioned conjugate gradients.

use std::time::Instant;

use super::sparse::Csr;
use super::{Preconditioner, SolveReport};
use crate::error::{EbError, Result};
use crate::scalar::{axpy, dot, norm2};
use crate::Real;

/// Solver settings shared by CG and MINRES.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Target `||b - A x|| / ||b||`.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> SolverOptions<T> {
    pub fn new(tol: T, max_iter: usize) -> Self {
        Self { tol, max_iter }
    }

    /// Cap of `factor * sqrt(n)` iterations (at least 20).
    pub fn capped(tol: T, n: usize, factor: f64) -> Self {
        Self {
            tol,
            max_iter: ((factor * (n as f64).sqrt()).ceil() as usize).max(20),
        }
    }
}

/// Solves `A x = b` for symmetric positive definite `A`.
///
/// Stops on the recursively updated residual and confirms with the true
/// residual; if the two disagree the iteration restarts from the true one.
/// A direction with `p^T A p <= 0` aborts with [`EbError::Indefinite`].
pub fn cg_solve<T: Real>(
    a: &Csr<T>,
    b: &[T],
    x0: Option<&[T]>,
    precond: Option<&dyn Preconditioner<T>>,
    opts: SolverOptions<T>,
) -> Result<SolveReport<T>> {
    let start = Instant::now();
    let n = a.n_rows();
    assert_eq!(b.len(), n, "right-hand side has wrong length");
    let mut x = x0.map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); n]);
    let bnorm = norm2(b);
    let mut history = Vec::new();
    if bnorm == T::zero() {
        return Ok(SolveReport::new(vec![T::zero(); n], 0, vec![T::zero()], start));
    }
    let mut r = residual(a, b, &x);
    let mut rel = norm2(&r) / bnorm;
    history.push(rel);
    if rel <= opts.tol {
        return Ok(SolveReport::new(x, 0, history, start));
    }
    let mut z = vec![T::zero(); n];
    let mut ap = vec![T::zero(); n];
    apply(precond, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iter {
        a.spmv(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(EbError::Indefinite {
                iteration: it,
                curvature: pap.as_f64(),
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        rel = norm2(&r) / bnorm;
        if rel <= opts.tol {
            r = residual(a, b, &x);
            rel = norm2(&r) / bnorm;
            history.push(rel);
            if rel <= opts.tol {
                return Ok(SolveReport::new(x, it, history, start));
            }
            apply(precond, &r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        history.push(rel);
        apply(precond, &r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(EbError::NotConverged {
        method: "cg",
        iterations: opts.max_iter,
        residual: rel.as_f64(),
    })
}

pub(crate) fn residual<T: Real>(a: &Csr<T>, b: &[T], x: &[T]) -> Vec<T> {
    let mut r = a.mul_vec(x);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

fn apply<T: Real>(precond: Option<&dyn Preconditioner<T>>, r: &[T], z: &mut [T]) {
    match precond {
        Some(m) => m.apply(r, z),
        None => z.copy_from_slice(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::solve_dense;

    fn laplacian_1d(n: usize) -> Csr<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        Csr::from_triplets(n, n, &t)
    }

    #[test]
    fn diagonal_system_in_two_iterations() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 3.0)]);
        let r = cg_solve::<f64>(&a, &[2.0, 3.0], None, None, SolverOptions::new(1e-12, 10)).unwrap();
        assert!(r.iterations <= 2);
        assert!((r.x[0] - 1.0).abs() < 1e-14 && (r.x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn poisson_1d_matches_dense_solve() {
        let n = 100;
        let a = laplacian_1d(n);
        let h = 1.0 / (n + 1) as f64;
        let b: Vec<f64> = (1..=n)
            .map(|i| h * h * std::f64::consts::PI.powi(2) * (std::f64::consts::PI * i as f64 * h).sin())
            .collect();
        let r = cg_solve(&a, &b, None, None, SolverOptions::new(1e-11, 500)).unwrap();
        let dense: Vec<f64> = a.to_dense().concat();
        let x = solve_dense(n, dense, &b, 1e-14).unwrap();
        for i in 0..n {
            assert!((r.x[i] - x[i]).abs() < 1e-10);
        }
        assert!(*r.residual_history.last().unwrap() <= 1e-11);
    }

    #[test]
    fn error_energy_norm_decreases() {
        let n = 80;
        let a = laplacian_1d(n);
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = a.mul_vec(&exact);
        let mut last = f64::INFINITY;
        // tighter tolerances run longer prefixes of the same iteration
        for k in 1..=10 {
            let x = cg_solve(&a, &b, None, None, SolverOptions::new(10f64.powi(-k), 200)).unwrap().x;
            let e: Vec<f64> = x.iter().zip(&exact).map(|(p, q)| p - q).collect();
            let en = dot(&e, &a.mul_vec(&e));
            assert!(en <= last * (1.0 + 1e-12));
            last = en;
        }
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        let e = cg_solve(&a, &[1.0, 1.0], None, None, SolverOptions::new(1e-12, 10)).unwrap_err();
        assert!(matches!(e, EbError::Indefinite { .. }));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = laplacian_1d(200);
        let b = vec![1.0; 200];
        let e = cg_solve(&a, &b, None, None, SolverOptions::new(1e-12, 5)).unwrap_err();
        assert!(matches!(e, EbError::NotConverged { method: "cg", iterations: 5, .. }));
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = laplacian_1d(4);
        let r = cg_solve(&a, &[0.0; 4], Some(&[1.0; 4]), None, SolverOptions::new(1e-12, 5)).unwrap();
        assert_eq!(r.x, vec![0.0; 4]);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn warm_start_at_solution_needs_no_iterations() {
        let a = laplacian_1d(10);
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let b = a.mul_vec(&x);
        let r = cg_solve(&a, &b, Some(&x), None, SolverOptions::new(1e-12, 5)).unwrap();
        assert_eq!(r.iterations, 0);
    }
}
