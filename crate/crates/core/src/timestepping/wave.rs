//! θ-scheme for `u_tt = L u`.

use super::ImplicitOperator;
use crate::error::{EbError, Result};
use crate::linalg::{cg_solve, Cycle, SolverOptions, SparseSym};
use crate::scalar::{dot, norm_inf};
use crate::Real;

/// Runs abort once `||u||_inf` exceeds this multiple of its initial value.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Two-step scheme
/// `(I + θ r A) u^{n+1} = 2u^n + (1-2θ) r (g^n - A u^n) - u^{n-1}
///                        + θ r (g^{n-1} - A u^{n-1}) + θ r g^{n+1}`
/// with `r = dt^2 / h^2` and `h^2 L u = g - A u`.
#[derive(Debug, Clone)]
pub struct ThetaScheme<T> {
    pub theta: T,
    pub dt: T,
    ratio: T,
    a: SparseSym<T>,
    implicit: Option<ImplicitOperator<T>>,
    tol: T,
    u_prev: Vec<T>,
    u_curr: Vec<T>,
    g_prev: Vec<T>,
    g_curr: Vec<T>,
    steps: usize,
    limit: T,
    iterations: Vec<usize>,
}

impl<T: Real> ThetaScheme<T> {
    /// `u0`, `u1` are the first two time levels and `g0`, `g1` their boundary data.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: &SparseSym<T>,
        h: T,
        theta: T,
        dt: T,
        (u0, u1): (Vec<T>, Vec<T>),
        (g0, g1): (Vec<T>, Vec<T>),
        cycle: Cycle,
    ) -> Result<Self> {
        if !(dt > T::zero()) || theta < T::zero() {
            return Err(EbError::Contract("theta-scheme needs dt > 0 and theta >= 0".into()));
        }
        let n = a.dim();
        if [u0.len(), u1.len(), g0.len(), g1.len()].iter().any(|&l| l != n) {
            return Err(EbError::Contract("initial data has the wrong length".into()));
        }
        let ratio = dt * dt / (h * h);
        let implicit = if theta > T::zero() {
            Some(ImplicitOperator::new(a, theta * ratio, cycle)?)
        } else {
            None
        };
        let scale = norm_inf(&u0).max(norm_inf(&u1)).max(T::min_positive_value());
        Ok(Self {
            theta,
            dt,
            ratio,
            a: a.clone(),
            implicit,
            tol: T::lit(1e-12),
            u_prev: u0,
            u_curr: u1,
            g_prev: g0,
            g_curr: g1,
            steps: 1,
            limit: scale * T::lit(BLOWUP_FACTOR),
            iterations: Vec::new(),
        })
    }

    /// CG relative residual for the implicit solves (default 1e-12).
    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    /// Latest time level.
    pub fn current(&self) -> &[T] {
        &self.u_curr
    }

    pub fn previous(&self) -> &[T] {
        &self.u_prev
    }

    /// Index of the latest time level (1 after construction).
    pub fn level(&self) -> usize {
        self.steps
    }

    /// CG iterations of every implicit step so far.
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

    /// Advances one step given the boundary data at the new level.
    pub fn step(&mut self, g_next: &[T]) -> Result<&[T]> {
        let n = self.u_curr.len();
        let (theta, r) = (self.theta, self.ratio);
        let two = T::lit(2.0);
        let au = self.a.mul_vec(&self.u_curr);
        let mut rhs: Vec<T> = (0..n)
            .map(|k| {
                two * self.u_curr[k] + (T::one() - two * theta) * r * (self.g_curr[k] - au[k]) - self.u_prev[k]
            })
            .collect();
        let next = match &self.implicit {
            None => rhs,
            Some(op) => {
                let aup = self.a.mul_vec(&self.u_prev);
                for k in 0..n {
                    rhs[k] += theta * r * (self.g_prev[k] - aup[k] + g_next[k]);
                }
                let opts = SolverOptions::capped(self.tol, n, 10.0);
                let sol = cg_solve(&op.m, &rhs, Some(&self.u_curr), Some(&op.amg), opts)?;
                self.iterations.push(sol.iterations);
                sol.x
            }
        };
        let peak = norm_inf(&next);
        self.steps += 1;
        if !(peak <= self.limit) {
            return Err(EbError::Unstable {
                step: self.steps,
                max_abs: peak.as_f64(),
            });
        }
        self.u_prev = std::mem::replace(&mut self.u_curr, next);
        self.g_prev = std::mem::replace(&mut self.g_curr, g_next.to_vec());
        Ok(&self.u_curr)
    }
}

/// Leap-frog energy `||(u^{n+1} - u^n)/dt||^2 + <u^{n+1}, A u^n> / h^2`,
/// conserved by the θ = 0 scheme with homogeneous boundary data.
pub fn leapfrog_energy<T: Real>(a: &SparseSym<T>, h: T, dt: T, u_next: &[T], u_curr: &[T]) -> T {
    let diff: Vec<T> = u_next.iter().zip(u_curr).map(|(&p, &q)| (p - q) / dt).collect();
    dot(&diff, &diff) + dot(u_next, &a.mul_vec(u_curr)) / (h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Csr;

    fn scalar(a: f64) -> SparseSym<f64> {
        SparseSym::new(Csr::from_triplets(1, 1, &[(0, 0, a)])).unwrap()
    }

    /// Companion matrix of one step, columns from unit initial states.
    fn companion(theta: f64, dt: f64, omega: f64) -> [[f64; 2]; 2] {
        let a = scalar(omega * omega);
        let mut m = [[0.0; 2]; 2];
        for (col, (u0, u1)) in [(1.0, 0.0), (0.0, 1.0)].into_iter().enumerate() {
            let mut s = ThetaScheme::new(&a, 1.0, theta, dt, (vec![u0], vec![u1]), (vec![0.0], vec![0.0]), Cycle::V)
                .unwrap();
            let next = s.step(&[0.0]).unwrap()[0];
            m[0][col] = u1;
            m[1][col] = next;
        }
        m
    }

    fn eigen_moduli(m: [[f64; 2]; 2]) -> [f64; 2] {
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = tr * tr / 4.0 - det;
        if disc < 0.0 {
            [det.sqrt(); 2]
        } else {
            [(tr / 2.0 + disc.sqrt()).abs(), (tr / 2.0 - disc.sqrt()).abs()]
        }
    }

    #[test]
    fn unconditional_stability_on_scalar_model() {
        for theta in [0.5, 0.25] {
            for dt in [0.01, 0.3, 1.0, 5.0, 100.0] {
                for l in eigen_moduli(companion(theta, dt, 3.0)) {
                    assert!((l - 1.0).abs() < 1e-8, "theta={theta} dt={dt}: |z| = {l}");
                }
            }
        }
    }

    #[test]
    fn explicit_scheme_has_a_step_limit() {
        // leap-frog is stable for omega dt <= 2
        assert!(eigen_moduli(companion(0.0, 0.6, 3.0)).iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!(eigen_moduli(companion(0.0, 0.7, 3.0)).iter().any(|&l| l > 1.5));
        // theta = 1/12 allows omega dt up to sqrt(6)
        assert!(eigen_moduli(companion(1.0 / 12.0, 0.8, 3.0)).iter().all(|&l| (l - 1.0).abs() < 1e-8));
        assert!(eigen_moduli(companion(1.0 / 12.0, 0.85, 3.0)).iter().any(|&l| l > 1.2));
    }

    #[test]
    fn explicit_step_is_leapfrog() {
        let a = scalar(4.0);
        let mut s = ThetaScheme::new(&a, 1.0, 0.0, 0.1, (vec![1.0], vec![0.9]), (vec![0.0], vec![0.0]), Cycle::V)
            .unwrap();
        let next = s.step(&[0.0]).unwrap()[0];
        assert!((next - (2.0 * 0.9 - 1.0 - 0.01 * 4.0 * 0.9)).abs() < 1e-15);
        assert!(s.iterations().is_empty());
    }

    #[test]
    fn blowup_is_detected() {
        let a = scalar(9.0);
        let mut s = ThetaScheme::new(&a, 1.0, 0.0, 1.0, (vec![1.0], vec![1.0]), (vec![0.0], vec![0.0]), Cycle::V)
            .unwrap();
        let err = (0..100).find_map(|_| s.step(&[0.0]).err()).unwrap();
        assert!(matches!(err, EbError::Unstable { .. }));
    }

    #[test]
    fn energy_is_conserved_by_leapfrog() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseSym::new(Csr::from_triplets(n, n, &t)).unwrap();
        let h = 1.0 / (n + 1) as f64;
        let dt = 0.7 * h;
        let u0: Vec<f64> = (1..=n).map(|i| (std::f64::consts::PI * i as f64 * h).sin()).collect();
        let u1 = u0.iter().map(|v| v * (std::f64::consts::PI * dt).cos()).collect();
        let zeros = vec![0.0; n];
        let mut s = ThetaScheme::new(&a, h, 0.0, dt, (u0, u1), (zeros.clone(), zeros.clone()), Cycle::V).unwrap();
        let e0 = leapfrog_energy(&a, h, dt, s.current(), s.previous());
        for _ in 0..2000 {
            s.step(&zeros).unwrap();
            let e = leapfrog_energy(&a, h, dt, s.current(), s.previous());
            assert!((e - e0).abs() < 1e-11 * e0, "{e} vs {e0}");
        }
    }
}
