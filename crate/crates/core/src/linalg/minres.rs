//! MINRES for symmetric, possibly indefinite systems.

use std::time::Instant;

use super::cg::{residual, SolverOptions};
use super::sparse::Csr;
use super::{Preconditioner, SolveReport};
use crate::error::{EbError, Result};
use crate::scalar::{dot, norm2};
use crate::Real;

/// Paige-Saunders MINRES with an optional symmetric positive definite
/// preconditioner. The relative residual is tracked by the recurrence and
/// confirmed with the true residual before returning.
pub fn minres_solve<T: Real>(
    a: &Csr<T>,
    b: &[T],
    x0: Option<&[T]>,
    precond: Option<&dyn Preconditioner<T>>,
    opts: SolverOptions<T>,
) -> Result<SolveReport<T>> {
    let start = Instant::now();
    let n = a.n_rows();
    assert_eq!(b.len(), n, "right-hand side has wrong length");
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok(SolveReport::new(vec![T::zero(); n], 0, vec![T::zero()], start));
    }
    let mut x = x0.map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); n]);
    let mut history = Vec::new();
    let mut total = 0;
    // restarts only happen when the recurrence and the true residual disagree
    for _ in 0..4 {
        let r0 = residual(a, b, &x);
        let rel = norm2(&r0) / bnorm;
        history.push(rel);
        if rel <= opts.tol {
            return Ok(SolveReport::new(x, total, history, start));
        }
        let budget = opts.max_iter.saturating_sub(total);
        if budget == 0 {
            break;
        }
        let (dx, its) = minres_cycle(a, &r0, precond, opts.tol * bnorm, budget, &mut history, bnorm)?;
        total += its;
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    let rel = norm2(&residual(a, b, &x)) / bnorm;
    if rel <= opts.tol {
        return Ok(SolveReport::new(x, total, history, start));
    }
    Err(EbError::NotConverged {
        method: "minres",
        iterations: total,
        residual: rel.as_f64(),
    })
}

/// One MINRES run on `A d = r0` from `d = 0`; returns the correction and
/// the number of iterations.
fn minres_cycle<T: Real>(
    a: &Csr<T>,
    r0: &[T],
    precond: Option<&dyn Preconditioner<T>>,
    abs_tol: T,
    max_iter: usize,
    history: &mut Vec<T>,
    bnorm: T,
) -> Result<(Vec<T>, usize)> {
    let n = r0.len();
    let zero = T::zero();
    let prec = |v: &[T], out: &mut [T]| match precond {
        Some(m) => m.apply(v, out),
        None => out.copy_from_slice(v),
    };
    let mut x = vec![zero; n];
    let mut r1 = r0.to_vec();
    let mut y = vec![zero; n];
    prec(&r1, &mut y);
    let mut beta1 = dot(&r1, &y);
    if beta1 < zero {
        return Err(EbError::Contract("MINRES preconditioner is not positive definite".into()));
    }
    beta1 = beta1.sqrt();
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (zero, beta1);
    let (mut dbar, mut epsln) = (zero, zero);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-T::one(), zero);
    let mut w = vec![zero; n];
    let mut w2 = vec![zero; n];
    let mut v = vec![zero; n];
    let mut av = vec![zero; n];
    let mut rnorm = norm2(r0);
    for it in 1..=max_iter {
        let s = T::one() / beta;
        for (vi, &yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        a.spmv(&v, &mut av);
        if it >= 2 {
            let c = beta / oldb;
            for (ai, &ri) in av.iter_mut().zip(&r1) {
                *ai -= c * ri;
            }
        }
        let alfa = dot(&v, &av);
        let c = alfa / beta;
        for (ai, &ri) in av.iter_mut().zip(&r2) {
            *ai -= c * ri;
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&av);
        prec(&r2, &mut y);
        oldb = beta;
        let b2 = dot(&r2, &y);
        if b2 < zero {
            return Err(EbError::Contract("MINRES preconditioner is not positive definite".into()));
        }
        beta = b2.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(T::min_positive_value());
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;

        let denom = T::one() / gamma;
        for k in 0..n {
            let w1 = w2[k];
            w2[k] = w[k];
            w[k] = (v[k] - oldeps * w1 - delta * w2[k]) * denom;
            x[k] += phi * w[k];
        }
        // phibar estimates the preconditioned residual norm; without a
        // preconditioner it is the residual norm itself
        rnorm = if precond.is_none() { phibar } else { rnorm.min(phibar) };
        history.push(phibar / bnorm);
        if phibar <= abs_tol || beta == zero {
            return Ok((x, it));
        }
    }
    let _ = rnorm;
    Ok((x, max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::solve_dense;

    #[test]
    fn indefinite_diagonal() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        let r = minres_solve::<f64>(&a, &[1.0, 1.0], None, None, SolverOptions::new(1e-12, 10)).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-12 && (r.x[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_laplacian_matches_dense_solve() {
        let n = 60;
        let shift = 0.3;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 - shift));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = Csr::from_triplets(n, n, &t);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let r = minres_solve(&a, &b, None, None, SolverOptions::new(1e-12, 1000)).unwrap();
        let x = solve_dense(n, a.to_dense().concat(), &b, 1e-14).unwrap();
        for i in 0..n {
            assert!((r.x[i] - x[i]).abs() < 1e-9, "{} vs {}", r.x[i], x[i]);
        }
    }
}
