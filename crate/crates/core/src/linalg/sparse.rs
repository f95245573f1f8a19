//! Compressed sparse row matrices.

use std::fmt::Write as _;
use std::ops::Deref;

use rayon::prelude::*;

use crate::error::{EbError, Result};
use crate::Real;

/// Rows below this count are multiplied serially.
const PAR_ROWS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> Csr<T> {
    /// Builds from raw arrays; column indices must be sorted and unique per row.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<T>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 || col_idx.len() != vals.len() || row_ptr[n_rows] != vals.len() {
            return Err(EbError::Contract("inconsistent CSR arrays".into()));
        }
        for r in 0..n_rows {
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= n_cols) {
                return Err(EbError::Contract(format!("row {r} has unsorted or out-of-range columns")));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Sums duplicates and drops exact zeros.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut sorted = triplets.to_vec();
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut vals: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(sorted.len());
        for &(r, c, v) in &sorted {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        let keep: Vec<bool> = vals.iter().map(|&v| v != T::zero()).collect();
        let mut ci = Vec::with_capacity(col_idx.len());
        let mut vv = Vec::with_capacity(vals.len());
        for (k, &r) in rows.iter().enumerate() {
            if keep[k] {
                row_ptr[r + 1] += 1;
                ci.push(col_idx[k]);
                vv.push(vals[k]);
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx: ci,
            vals: vv,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![T::one(); n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.vals
    }

    /// `(columns, values)` of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[s..e], &self.vals[s..e])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|k| vals[k]).unwrap_or(T::zero())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n_rows.min(self.n_cols)).map(|r| self.get(r, r)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.vals.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        let row = |r: usize| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).fold(T::zero(), |acc, (&c, &v)| acc + v * x[c])
        };
        if self.n_rows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, yr)| *yr = row(r));
        } else {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr = row(r);
            }
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n_rows];
        self.spmv(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            count[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            count[c + 1] += count[c];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut col_idx = vec![0; self.nnz()];
        let mut vals = vec![T::zero(); self.nnz()];
        for r in 0..self.n_rows {
            let (cols, vs) = self.row(r);
            for (&c, &v) in cols.iter().zip(vs) {
                let k = next[c];
                col_idx[k] = r;
                vals[k] = v;
                next[c] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Sparse product `self * other` (row-by-row accumulation).
    pub fn matmul(&self, other: &Csr<T>) -> Self {
        assert_eq!(self.n_cols, other.n_rows);
        let n = other.n_cols;
        let rows: Vec<(Vec<usize>, Vec<T>)> = (0..self.n_rows)
            .into_par_iter()
            .map_init(
                || (vec![usize::MAX; n], Vec::new(), Vec::new()),
                |(marker, cols, acc), r| {
                    cols.clear();
                    acc.clear();
                    let (ac, av) = self.row(r);
                    for (&k, &a) in ac.iter().zip(av) {
                        let (bc, bv) = other.row(k);
                        for (&c, &b) in bc.iter().zip(bv) {
                            if marker[c] == usize::MAX {
                                marker[c] = cols.len();
                                cols.push(c);
                                acc.push(a * b);
                            } else {
                                acc[marker[c]] += a * b;
                            }
                        }
                    }
                    let mut pairs: Vec<(usize, T)> =
                        cols.iter().copied().zip(acc.iter().copied()).collect();
                    for &c in cols.iter() {
                        marker[c] = usize::MAX;
                    }
                    pairs.sort_by_key(|p| p.0);
                    pairs.retain(|p| p.1 != T::zero());
                    pairs.into_iter().unzip()
                },
            )
            .collect();
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for (c, v) in rows {
            col_idx.extend(c);
            vals.extend(v);
            row_ptr.push(col_idx.len());
        }
        Self {
            n_rows: self.n_rows,
            n_cols: n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// `self + alpha I` (square matrices); the diagonal pattern is added if missing.
    pub fn add_diagonal(&self, alpha: T) -> Self {
        assert_eq!(self.n_rows, self.n_cols);
        let mut t: Vec<(usize, usize, T)> = Vec::with_capacity(self.nnz() + self.n_rows);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                t.push((r, c, v));
            }
            t.push((r, r, alpha));
        }
        Self::from_triplets(self.n_rows, self.n_cols, &t)
    }

    /// Every entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= alpha;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n_cols]; self.n_rows];
        for (r, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        d
    }

    /// Coordinate-format MatrixMarket text, 1-based, row-major sorted.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.n_rows, self.n_cols, self.nnz());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let _ = writeln!(s, "{} {} {:.17e}", r + 1, c + 1, v);
            }
        }
        s
    }

    /// Largest `|a_ij - a_ji|`; infinite when the patterns differ.
    pub fn asymmetry(&self) -> T {
        if self.n_rows != self.n_cols {
            return T::infinity();
        }
        let t = self.transpose();
        if t.row_ptr != self.row_ptr || t.col_idx != self.col_idx {
            return T::infinity();
        }
        self.vals
            .iter()
            .zip(&t.vals)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

/// CSR matrix whose values are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym<T>(Csr<T>);

impl<T: Real> SparseSym<T> {
    pub fn new(a: Csr<T>) -> Result<Self> {
        let asym = a.asymmetry();
        if asym != T::zero() {
            return Err(EbError::Contract(format!("matrix is not symmetric (max |a_ij - a_ji| = {asym})")));
        }
        Ok(Self(a))
    }

    /// Symmetrizes round-off level asymmetry as `(A + A^T)/2`.
    pub fn symmetrized(a: &Csr<T>) -> Self {
        let t = a.transpose();
        let mut trip = Vec::with_capacity(2 * a.nnz());
        for r in 0..a.n_rows() {
            for m in [a, &t] {
                let (cols, vals) = m.row(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    trip.push((r, c, v * T::lit(0.5)));
                }
            }
        }
        Self(Csr::from_triplets(a.n_rows(), a.n_cols(), &trip))
    }

    pub fn dim(&self) -> usize {
        self.0.n_rows
    }

    pub fn csr(&self) -> &Csr<T> {
        &self.0
    }

    pub fn into_csr(self) -> Csr<T> {
        self.0
    }

    /// `A + alpha I`, still symmetric.
    pub fn shifted(&self, alpha: T) -> Self {
        Self(self.0.add_diagonal(alpha))
    }

    /// `scale A + shift I`.
    pub fn affine(&self, scale: T, shift: T) -> Self {
        Self(self.0.scaled(scale).add_diagonal(shift))
    }
}

impl<T> Deref for SparseSym<T> {
    type Target = Csr<T>;

    fn deref(&self) -> &Csr<T> {
        &self.0
    }
}
