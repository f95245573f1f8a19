//! Classical Ruge-Stueben algebraic multigrid.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::time::Instant;

use super::dense::DenseLu;
use super::sparse::{Csr, SparseSym};
use super::Preconditioner;
use crate::error::{EbError, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cycle {
    V,
    W,
}

impl Cycle {
    fn visits(self) -> usize {
        match self {
            Cycle::V => 1,
            Cycle::W => 2,
        }
    }
}

impl std::str::FromStr for Cycle {
    type Err = EbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "V" | "v" => Ok(Cycle::V),
            "W" | "w" => Ok(Cycle::W),
            other => Err(EbError::Contract(format!("unknown cycle `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmgParams {
    /// Strength threshold on `-a_ij` relative to the row maximum.
    pub theta: f64,
    pub max_levels: usize,
    /// Levels with at most this many unknowns are solved directly.
    pub coarse_size: usize,
    /// Coarsening that keeps more than this fraction of points stagnates.
    pub max_coarse_ratio: f64,
}

impl Default for AmgParams {
    fn default() -> Self {
        Self {
            theta: 0.25,
            max_levels: 25,
            coarse_size: 50,
            max_coarse_ratio: 0.9,
        }
    }
}

#[derive(Debug, Clone)]
struct Level<T> {
    a: Csr<T>,
    /// Prolongation to this level from the next coarser one.
    p: Csr<T>,
    r: Csr<T>,
    diag: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy<T> {
    levels: Vec<Level<T>>,
    coarsest: DenseLu<T>,
    coarsest_size: usize,
    pub cycle: Cycle,
    pub params: AmgParams,
    pub setup_seconds: f64,
}

impl<T: Real> AmgHierarchy<T> {
    /// Builds the hierarchy for a symmetric positive definite operator.
    pub fn setup(a: &SparseSym<T>, cycle: Cycle, params: AmgParams) -> Result<Self> {
        let start = Instant::now();
        if a.dim() == 0 {
            return Err(EbError::EmptySystem);
        }
        let mut levels = Vec::new();
        let mut current = a.csr().clone();
        while current.n_rows() > params.coarse_size && levels.len() + 1 < params.max_levels {
            let n = current.n_rows();
            let strong = strength(&current, params.theta);
            let cf = split(&current, &strong);
            let n_c = cf.iter().filter(|&&c| c).count();
            if n_c == 0 || n_c as f64 > params.max_coarse_ratio * n as f64 {
                log::warn!("AMG coarsening stagnated at level {} ({n} -> {n_c})", levels.len());
                break;
            }
            let p = interpolation(&current, &strong, &cf)?;
            let r = p.transpose();
            let coarse = SparseSym::symmetrized(&r.matmul(&current.matmul(&p))).into_csr();
            let diag = diagonal_checked(&current)?;
            levels.push(Level { a: current, p, r, diag });
            current = coarse;
        }
        let coarsest_size = current.n_rows();
        let coarsest = DenseLu::factor(coarsest_size, current.to_dense().concat(), T::lit(1e-14))?;
        Ok(Self {
            levels,
            coarsest,
            coarsest_size,
            cycle,
            params,
            setup_seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// Unknowns per level, finest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.levels.iter().map(|l| l.a.n_rows()).collect();
        s.push(self.coarsest_size);
        s
    }

    /// Total nonzeros over all levels divided by those of the finest.
    pub fn operator_complexity(&self) -> f64 {
        let fine = self.levels.first().map_or(1, |l| l.a.nnz()) as f64;
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum();
        (total + self.coarsest_size * self.coarsest_size) as f64 / fine
    }

    /// Galerkin operator of level `k` (0 is the finest).
    pub fn operator(&self, k: usize) -> Option<&Csr<T>> {
        self.levels.get(k).map(|l| &l.a)
    }

    pub fn prolongation(&self, k: usize) -> Option<&Csr<T>> {
        self.levels.get(k).map(|l| &l.p)
    }

    /// One multigrid cycle from a zero initial guess.
    pub fn apply(&self, r: &[T], z: &mut [T]) {
        z.iter_mut().for_each(|v| *v = T::zero());
        self.cycle_at(0, r, z);
    }

    fn cycle_at(&self, k: usize, b: &[T], x: &mut [T]) {
        let Some(level) = self.levels.get(k) else {
            self.coarsest.solve_into(b, x);
            return;
        };
        gauss_seidel(&level.a, &level.diag, b, x, false);
        let mut res = level.a.mul_vec(x);
        for (ri, &bi) in res.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let rc = level.r.mul_vec(&res);
        let mut xc = vec![T::zero(); rc.len()];
        // the coarsest level is exact, so a second visit would be wasted work
        let visits = if k + 1 == self.levels.len() { 1 } else { self.cycle.visits() };
        for _ in 0..visits {
            if xc.iter().all(|v| *v == T::zero()) {
                self.cycle_at(k + 1, &rc, &mut xc);
            } else {
                let coarse = &self.levels[k + 1].a;
                let mut rc2 = coarse.mul_vec(&xc);
                for (ri, &bi) in rc2.iter_mut().zip(&rc) {
                    *ri = bi - *ri;
                }
                let mut dc = vec![T::zero(); rc.len()];
                self.cycle_at(k + 1, &rc2, &mut dc);
                for (a, d) in xc.iter_mut().zip(dc) {
                    *a += d;
                }
            }
        }
        let corr = level.p.mul_vec(&xc);
        for (xi, c) in x.iter_mut().zip(corr) {
            *xi += c;
        }
        gauss_seidel(&level.a, &level.diag, b, x, true);
    }
}

impl<T: Real> Preconditioner<T> for AmgHierarchy<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        AmgHierarchy::apply(self, r, z);
    }
}

fn diagonal_checked<T: Real>(a: &Csr<T>) -> Result<Vec<T>> {
    let d = a.diagonal();
    if let Some(i) = d.iter().position(|v| !(*v > T::zero())) {
        return Err(EbError::Contract(format!(
            "AMG needs a positive diagonal (row {i} has {})",
            d[i].as_f64()
        )));
    }
    Ok(d)
}

fn gauss_seidel<T: Real>(a: &Csr<T>, diag: &[T], b: &[T], x: &mut [T], backward: bool) {
    let n = a.n_rows();
    let sweep = |i: usize, x: &mut [T]| {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&c, &v) in cols.iter().zip(vals) {
            if c != i {
                s -= v * x[c];
            }
        }
        x[i] = s / diag[i];
    };
    if backward {
        (0..n).rev().for_each(|i| sweep(i, x));
    } else {
        (0..n).for_each(|i| sweep(i, x));
    }
}

/// `strong[i]` lists the points that strongly influence `i`.
fn strength<T: Real>(a: &Csr<T>, theta: f64) -> Vec<Vec<usize>> {
    let theta = T::lit(theta);
    (0..a.n_rows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            let max = cols
                .iter()
                .zip(vals)
                .filter(|(&c, _)| c != i)
                .fold(T::zero(), |m, (_, &v)| m.max(-v));
            if max <= T::zero() {
                return Vec::new();
            }
            cols.iter()
                .zip(vals)
                .filter(|(&c, &v)| c != i && -v >= theta * max)
                .map(|(&c, _)| c)
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Undecided,
    Coarse,
    Fine,
}

/// C/F splitting; `true` marks coarse points.
fn split<T: Real>(a: &Csr<T>, strong: &[Vec<usize>]) -> Vec<bool> {
    let n = a.n_rows();
    let mut influences = vec![Vec::new(); n];
    for (i, s) in strong.iter().enumerate() {
        for &j in s {
            influences[j].push(i);
        }
    }
    let mut state = vec![State::Undecided; n];
    let mut lambda: Vec<usize> = influences.iter().map(Vec::len).collect();
    let mut queue = BTreeSet::new();
    for i in 0..n {
        if strong[i].is_empty() && influences[i].is_empty() {
            state[i] = State::Fine;
        } else {
            queue.insert((lambda[i], Reverse(i)));
        }
    }
    while let Some((l, Reverse(i))) = queue.pop_last() {
        if l == 0 && strong[i].is_empty() {
            state[i] = State::Fine;
            continue;
        }
        state[i] = State::Coarse;
        for &j in &influences[i] {
            if state[j] != State::Undecided {
                continue;
            }
            queue.remove(&(lambda[j], Reverse(j)));
            state[j] = State::Fine;
            for &k in &strong[j] {
                if state[k] == State::Undecided {
                    queue.remove(&(lambda[k], Reverse(k)));
                    lambda[k] += 1;
                    queue.insert((lambda[k], Reverse(k)));
                }
            }
        }
        for &j in &strong[i] {
            if state[j] == State::Undecided && lambda[j] > 0 {
                queue.remove(&(lambda[j], Reverse(j)));
                lambda[j] -= 1;
                queue.insert((lambda[j], Reverse(j)));
            }
        }
    }
    // second pass: strongly coupled F-F pairs need a common C point
    let mut coarse: Vec<bool> = state.iter().map(|s| *s == State::Coarse).collect();
    for i in 0..n {
        if coarse[i] {
            continue;
        }
        for &j in &strong[i] {
            if coarse[j] || coarse[i] {
                continue;
            }
            let shared = strong[i]
                .iter()
                .any(|&k| coarse[k] && strong[j].contains(&k));
            if !shared {
                coarse[j] = true;
            }
        }
    }
    coarse
}

/// Direct interpolation from the strongly influencing coarse points.
fn interpolation<T: Real>(a: &Csr<T>, strong: &[Vec<usize>], coarse: &[bool]) -> Result<Csr<T>> {
    let n = a.n_rows();
    let mut coarse_index = vec![usize::MAX; n];
    let mut n_c = 0;
    for i in 0..n {
        if coarse[i] {
            coarse_index[i] = n_c;
            n_c += 1;
        }
    }
    let mut triplets = Vec::new();
    for i in 0..n {
        if coarse[i] {
            triplets.push((i, coarse_index[i], T::one()));
            continue;
        }
        let (cols, vals) = a.row(i);
        let is_interp = |c: usize| coarse[c] && strong[i].contains(&c);
        let (mut diag, mut neg_all, mut pos_all, mut neg_c, mut pos_c) =
            (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i {
                diag += v;
            } else if v < T::zero() {
                neg_all += v;
                if is_interp(c) {
                    neg_c += v;
                }
            } else {
                pos_all += v;
                if is_interp(c) {
                    pos_c += v;
                }
            }
        }
        if !(diag > T::zero()) {
            return Err(EbError::Contract(format!("AMG needs a positive diagonal (row {i})")));
        }
        if pos_c == T::zero() {
            // no positive coarse connection to carry them: lump into the diagonal
            diag += pos_all;
        }
        let alpha = if neg_c < T::zero() { neg_all / neg_c } else { T::zero() };
        let beta = if pos_c > T::zero() { pos_all / pos_c } else { T::zero() };
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i || !is_interp(c) {
                continue;
            }
            let scale = if v < T::zero() { alpha } else { beta };
            triplets.push((i, coarse_index[c], -scale * v / diag));
        }
    }
    Ok(Csr::from_triplets(n, n_c, &triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cg::{cg_solve, SolverOptions};
    use crate::scalar::dot;

    fn laplacian_2d(m: usize) -> SparseSym<f64> {
        let idx = |i: usize, j: usize| j * m + i;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                t.push((idx(i, j), idx(i, j), 4.0));
                if i + 1 < m {
                    t.push((idx(i, j), idx(i + 1, j), -1.0));
                    t.push((idx(i + 1, j), idx(i, j), -1.0));
                }
                if j + 1 < m {
                    t.push((idx(i, j), idx(i, j + 1), -1.0));
                    t.push((idx(i, j + 1), idx(i, j), -1.0));
                }
            }
        }
        SparseSym::new(Csr::from_triplets(m * m, m * m, &t)).unwrap()
    }

    #[test]
    fn small_system_is_solved_exactly() {
        let a = laplacian_2d(5);
        let h = AmgHierarchy::setup(&a, Cycle::V, AmgParams::default()).unwrap();
        assert_eq!(h.num_levels(), 1);
        let b: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let mut x = vec![0.0; 25];
        h.apply(&b, &mut x);
        let ax = a.mul_vec(&x);
        for i in 0..25 {
            assert!((ax[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn preconditioner_is_symmetric() {
        let a = laplacian_2d(40);
        for cycle in [Cycle::V, Cycle::W] {
            let h = AmgHierarchy::setup(&a, cycle, AmgParams::default()).unwrap();
            assert!(h.num_levels() > 2);
            let n = a.dim();
            let x: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
            let y: Vec<f64> = (0..n).map(|i| ((i * 13) % 7) as f64 * 0.5).collect();
            let (mut mx, mut my) = (vec![0.0; n], vec![0.0; n]);
            h.apply(&x, &mut mx);
            h.apply(&y, &mut my);
            let (l, r) = (dot(&mx, &y), dot(&x, &my));
            assert!((l - r).abs() <= 1e-10 * l.abs().max(1.0), "{l} vs {r}");
        }
    }

    #[test]
    fn galerkin_coarse_operator() {
        let a = laplacian_2d(30);
        let h = AmgHierarchy::setup(&a, Cycle::V, AmgParams::default()).unwrap();
        let p = h.prolongation(0).unwrap();
        let coarse = h.operator(1).unwrap();
        let rap = p.transpose().matmul(&a.matmul(p));
        let (d1, d2) = (coarse.to_dense(), rap.to_dense());
        let scale = a.max_abs();
        for (r1, r2) in d1.iter().zip(&d2) {
            for (x, y) in r1.iter().zip(r2) {
                assert!((x - y).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn stationary_cycles_reduce_energy_error() {
        let a = laplacian_2d(48);
        let n = a.dim();
        let h = AmgHierarchy::setup(&a, Cycle::V, AmgParams::default()).unwrap();
        let mut e: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let energy = |e: &[f64]| dot(e, &a.mul_vec(e)).sqrt();
        let mut last = energy(&e);
        for _ in 0..6 {
            let r = a.mul_vec(&e);
            let mut z = vec![0.0; n];
            h.apply(&r, &mut z);
            for (ei, zi) in e.iter_mut().zip(z) {
                *ei -= zi;
            }
            let now = energy(&e);
            assert!(now < 0.5 * last, "{now} vs {last}");
            last = now;
        }
    }

    #[test]
    fn coarse_levels_shrink() {
        let a = laplacian_2d(64);
        let h = AmgHierarchy::setup(&a, Cycle::V, AmgParams::default()).unwrap();
        let sizes = h.level_sizes();
        assert!(sizes.windows(2).all(|w| w[1] < w[0]));
        assert!(*sizes.last().unwrap() <= 50);
        assert!(h.operator_complexity() < 4.0);
    }

    #[test]
    fn amg_cuts_cg_iterations() {
        let a = laplacian_2d(64);
        let b: Vec<f64> = (0..a.dim()).map(|i| 1.0 + (i % 3) as f64).collect();
        let opts = SolverOptions::new(1e-10, 2000);
        let plain = cg_solve(&a, &b, None, None, opts).unwrap();
        for cycle in [Cycle::V, Cycle::W] {
            let h = AmgHierarchy::setup(&a, cycle, AmgParams::default()).unwrap();
            let pre = cg_solve(&a, &b, None, Some(&h), opts).unwrap();
            assert!(
                pre.iterations * 5 <= plain.iterations,
                "{cycle:?}: {} vs {}",
                pre.iterations,
                plain.iterations
            );
        }
    }
}
