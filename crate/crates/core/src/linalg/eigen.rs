//! Extremal eigenvalues of symmetric positive definite operators.

use super::cg::{cg_solve, SolverOptions};
use super::sparse::Csr;
use super::Preconditioner;
use crate::error::{EbError, Result};
use crate::scalar::{axpy, dot, norm2};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Min,
    Max,
}

/// Largest eigenvalue by Lanczos with full reorthogonalization, smallest by
/// inverse iteration with (optionally preconditioned) CG inner solves.
/// `tol` bounds the relative Ritz residual for the largest eigenvalue and
/// the relative change between estimates for the smallest.
pub fn extremal_eigs<T: Real>(
    a: &Csr<T>,
    which: Which,
    tol: T,
    precond: Option<&dyn Preconditioner<T>>,
) -> Result<T> {
    if a.n_rows() == 0 {
        return Err(EbError::EmptySystem);
    }
    match which {
        Which::Max => lanczos_max(a, tol, 500),
        Which::Min => inverse_iteration(a, tol, precond, 500),
    }
}

fn start_vector<T: Real>(n: usize) -> Vec<T> {
    let v: Vec<T> = (0..n).map(|i| T::one() + T::lit(0.1) * T::of(i).sin()).collect();
    let s = T::one() / norm2(&v);
    v.into_iter().map(|x| x * s).collect()
}

fn lanczos_max<T: Real>(a: &Csr<T>, tol: T, max_steps: usize) -> Result<T> {
    let n = a.n_rows();
    let steps = max_steps.min(n);
    let mut basis: Vec<Vec<T>> = vec![start_vector(n)];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut w = vec![T::zero(); n];
    let mut residual = T::infinity();
    for k in 0..steps {
        a.spmv(&basis[k], &mut w);
        let alpha = dot(&w, &basis[k]);
        alphas.push(alpha);
        // two passes of classical Gram-Schmidt keep the basis orthogonal
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(-c, q, &mut w);
            }
        }
        let theta = tridiagonal_max(&alphas, &betas);
        let beta = norm2(&w);
        // ||A y - theta y|| for the Ritz vector y
        residual = beta * ritz_last_component(&alphas, &betas, theta);
        if residual <= tol * theta.abs() || beta <= T::epsilon() * theta.abs() || k + 1 == n {
            return Ok(theta);
        }
        betas.push(beta);
        let s = T::one() / beta;
        basis.push(w.iter().map(|&x| x * s).collect());
    }
    Err(EbError::NotConverged {
        method: "lanczos",
        iterations: steps,
        residual: residual.as_f64() / tridiagonal_max(&alphas, &betas[..alphas.len() - 1]).abs().as_f64(),
    })
}

/// `|y_m|` for the unit eigenvector `y` of the tridiagonal matrix belonging
/// to `theta`, by two steps of shifted inverse iteration.
fn ritz_last_component<T: Real>(alphas: &[T], betas: &[T], theta: T) -> T {
    let m = alphas.len();
    if m == 1 {
        return T::one();
    }
    let shift = theta + T::epsilon().sqrt() * T::epsilon().sqrt().sqrt() * (theta.abs() + T::one());
    let mut y = vec![T::one(); m];
    for _ in 0..2 {
        // Thomas algorithm on T - shift I
        let mut c = vec![T::zero(); m];
        let mut d = vec![T::zero(); m];
        let mut piv = alphas[0] - shift;
        for i in 0..m {
            if i > 0 {
                piv = alphas[i] - shift - betas[i - 1] * c[i - 1];
            }
            if piv.abs() < T::min_positive_value().sqrt() {
                piv = T::min_positive_value().sqrt();
            }
            if i + 1 < m {
                c[i] = betas[i] / piv;
            }
            d[i] = (y[i] - if i > 0 { betas[i - 1] * d[i - 1] } else { T::zero() }) / piv;
        }
        for i in (0..m - 1).rev() {
            d[i] = d[i] - c[i] * d[i + 1];
        }
        let s = T::one() / norm2(&d);
        y = d.into_iter().map(|v| v * s).collect();
    }
    y[m - 1].abs()
}

/// Largest eigenvalue of the symmetric tridiagonal matrix by Sturm bisection.
fn tridiagonal_max<T: Real>(alphas: &[T], betas: &[T]) -> T {
    let m = alphas.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..m {
        let r = if i > 0 { betas[i - 1].abs() } else { T::zero() }
            + if i < betas.len() { betas[i].abs() } else { T::zero() };
        lo = lo.min(alphas[i] - r);
        hi = hi.max(alphas[i] + r);
    }
    // count of eigenvalues below x
    let below = |x: T| {
        let mut count = 0;
        let mut d = T::one();
        for i in 0..m {
            let b2 = if i > 0 { betas[i - 1] * betas[i - 1] } else { T::zero() };
            d = alphas[i] - x - if i > 0 { b2 / d } else { T::zero() };
            if d == T::zero() {
                d = T::epsilon() * (x.abs() + T::one());
            }
            if d < T::zero() {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) == m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn inverse_iteration<T: Real>(
    a: &Csr<T>,
    tol: T,
    precond: Option<&dyn Preconditioner<T>>,
    max_iter: usize,
) -> Result<T> {
    let n = a.n_rows();
    let mut v = start_vector::<T>(n);
    let inner = SolverOptions::capped(T::lit(1e-12).max(T::epsilon() * T::lit(100.0)), n, 50.0);
    let mut last = T::zero();
    for it in 0..max_iter {
        let av = a.mul_vec(&v);
        let rq = dot(&v, &av);
        if it > 0 && (rq - last).abs() <= tol * rq.abs() {
            return Ok(rq);
        }
        last = rq;
        let y = cg_solve(a, &v, Some(&v), precond, inner)?.x;
        let s = T::one() / norm2(&y);
        v = y.into_iter().map(|x| x * s).collect();
    }
    Err(EbError::NotConverged {
        method: "inverse iteration",
        iterations: max_iter,
        residual: 0.0,
    })
}
