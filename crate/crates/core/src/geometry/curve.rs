use std::fmt;
use std::sync::Arc;

use super::point::Point;
use super::root::golden_min;
use crate::Real;

pub type CurveMap<T> = Arc<dyn Fn(T) -> Point<T> + Send + Sync>;

/// A closed parametric boundary curve `t -> (x(t), y(t))`, `t in [t_lo, t_hi]`.
///
/// The curve is sampled once at construction; closest-point queries start
/// from the best sample and refine by golden section followed by Newton
/// steps on the stationarity condition `(c(t) - p) . c'(t) = 0`.
#[derive(Clone)]
pub struct ParametricCurve<T: Real> {
    position: CurveMap<T>,
    tangent: CurveMap<T>,
    t_lo: T,
    t_hi: T,
    samples: Arc<Vec<(T, Point<T>)>>,
    orientation: T,
}

impl<T: Real> fmt::Debug for ParametricCurve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricCurve")
            .field("t_lo", &self.t_lo)
            .field("t_hi", &self.t_hi)
            .field("n_guess", &self.samples.len())
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl<T: Real> ParametricCurve<T> {
    pub fn new(
        position: impl Fn(T) -> Point<T> + Send + Sync + 'static,
        tangent: impl Fn(T) -> Point<T> + Send + Sync + 'static,
        t_lo: T,
        t_hi: T,
        n_guess: usize,
    ) -> Self {
        assert!(n_guess >= 3, "need at least three parameter samples");
        let dt = (t_hi - t_lo) / T::of(n_guess);
        let samples: Vec<_> = (0..n_guess)
            .map(|k| {
                let t = t_lo + dt * T::of(k);
                (t, position(t))
            })
            .collect();
        // shoelace sign: positive for counterclockwise traversal
        let mut area = T::zero();
        for k in 0..samples.len() {
            let p = samples[k].1;
            let q = samples[(k + 1) % samples.len()].1;
            area += p.cross(q);
        }
        Self {
            position: Arc::new(position),
            tangent: Arc::new(tangent),
            t_lo,
            t_hi,
            samples: Arc::new(samples),
            orientation: if area >= T::zero() { T::one() } else { -T::one() },
        }
    }

    pub fn position(&self, t: T) -> Point<T> {
        (self.position)(t)
    }

    pub fn tangent(&self, t: T) -> Point<T> {
        (self.tangent)(t)
    }

    pub fn parameter_range(&self) -> (T, T) {
        (self.t_lo, self.t_hi)
    }

    pub fn n_guess(&self) -> usize {
        self.samples.len()
    }

    /// `+1` for counterclockwise curves, `-1` otherwise.
    pub fn orientation(&self) -> T {
        self.orientation
    }

    /// Parameter of the best uniform sample.
    pub fn initial_guess(&self, p: Point<T>) -> T {
        let mut best = (T::infinity(), self.t_lo);
        for &(t, q) in self.samples.iter() {
            let d = (q - p).dot(q - p);
            if d < best.0 {
                best = (d, t);
            }
        }
        best.1
    }

    /// Closest point on the curve to `p` and its parameter.
    pub fn closest(&self, p: Point<T>) -> (T, Point<T>) {
        let t0 = self.initial_guess(p);
        let dt = (self.t_hi - self.t_lo) / T::of(self.samples.len());
        let dist2 = |t: T| {
            let d = self.position(t) - p;
            d.dot(d)
        };
        let mut t = golden_min(dist2, t0 - dt, t0 + dt, 40);
        let (lo, hi) = (t0 - dt, t0 + dt);
        let fd = T::lit(1e-6) * dt.max(T::epsilon().sqrt());
        let two = T::lit(2.0);
        for _ in 0..8 {
            let c = self.position(t);
            let d1 = self.tangent(t);
            let d2 = (self.tangent(t + fd) - self.tangent(t - fd)) * (T::one() / (two * fd));
            let g = (c - p).dot(d1);
            let dg = d1.dot(d1) + (c - p).dot(d2);
            if dg <= T::zero() || !dg.is_finite() {
                break;
            }
            let next = t - g / dg;
            if next < lo || next > hi || dist2(next) > dist2(t) {
                break;
            }
            let step = (next - t).abs();
            t = next;
            if step <= T::epsilon() * T::lit(8.0) * (T::one() + t.abs()) {
                break;
            }
        }
        (t, self.position(t))
    }

    /// Signed distance: negative inside the region the curve encloses.
    pub fn signed_distance(&self, p: Point<T>) -> T {
        let (t, q) = self.closest(p);
        let n = q - p;
        let d = n.norm();
        if d == T::zero() {
            return T::zero();
        }
        let s = n.cross(self.tangent(t)) * self.orientation;
        if s > T::zero() {
            -d
        } else {
            d
        }
    }
}
