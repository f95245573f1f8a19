//! Small dense LU with partial pivoting.

use crate::error::{EbError, Result};
use crate::Real;

/// `PA = LU` of a row-major square matrix.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    /// Factors `a` (row-major, `n x n`). A pivot below `rel_tol` times the
    /// largest pivot seen so far is reported as singular.
    pub fn factor(n: usize, mut a: Vec<T>, rel_tol: T) -> Result<Self> {
        assert_eq!(a.len(), n * n, "dense matrix has wrong size");
        let mut perm: Vec<usize> = (0..n).collect();
        let mut largest = T::zero();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -T::one()), |best, c| if c.1 > best.1 { c } else { best });
            largest = largest.max(pivot);
            if !(pivot > rel_tol * largest) || pivot == T::zero() {
                return Err(EbError::SingularMatrix {
                    column: k,
                    pivot: pivot.as_f64(),
                });
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let l = a[r * n + k] / d;
                a[r * n + k] = l;
                if l != T::zero() {
                    for c in k + 1..n {
                        let u = a[k * n + c];
                        a[r * n + c] -= l * u;
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = vec![T::zero(); self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[T], x: &mut [T]) {
        let n = self.n;
        for (i, &p) in self.perm.iter().enumerate() {
            x[i] = b[p];
        }
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
    }
}

/// Solves `a x = b` once.
pub fn solve_dense<T: Real>(n: usize, a: Vec<T>, b: &[T], rel_tol: T) -> Result<Vec<T>> {
    Ok(DenseLu::factor(n, a, rel_tol)?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    #[test]
    fn solves_permuted_system() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = solve_dense(3, a, &[5.0, 3.0, 6.0], 1e-12).unwrap();
        let r = [2.0 * x[1] + x[2] - 5.0, x[0] + x[1] - 3.0, 3.0 * x[0] + x[2] - 6.0];
        assert!(r.iter().all(|v: &f64| v.abs() < 1e-14));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(matches!(
            solve_dense(2, a, &[1.0, 1.0], 1e-12),
            Err(EbError::SingularMatrix { column: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn matches_nalgebra(entries in proptest::collection::vec(-1.0f64..1.0, 36), rhs in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let mut a = entries.clone();
            for i in 0..6 {
                a[i * 6 + i] += 4.0;
            }
            let x = solve_dense(6, a.clone(), &rhs, 1e-12).unwrap();
            let m = DMatrix::from_row_slice(6, 6, &a);
            let y = m.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
            for i in 0..6 {
                prop_assert!((x[i] - y[i]).abs() < 1e-12);
            }
        }
    }
}
