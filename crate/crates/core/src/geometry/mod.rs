//! Domain description and the geometric queries the discretization needs.
//!
//! A [`Geometry`] wraps either an analytic level set, a closed parametric
//! curve (whose level set is the signed distance), or one of a few analytic
//! primitives with closed-form intersections and closest points. The sign
//! convention is `psi < 0` strictly inside the domain.

mod curve;
mod point;
mod root;
pub mod shapes;

use std::fmt;
use std::sync::Arc;

pub use curve::ParametricCurve;
pub use point::Point;

use crate::error::{EbError, Result};
use crate::Real;
use root::bracketed_secant;

/// Grid-line direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    pub fn unit<T: Real>(self) -> Point<T> {
        match self {
            Axis::X => Point::new(T::one(), T::zero()),
            Axis::Y => Point::new(T::zero(), T::one()),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

pub type LevelSetFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// How the boundary is represented.
#[derive(Clone)]
pub enum Shape<T: Real> {
    LevelSet(LevelSetFn<T>),
    Curve(ParametricCurve<T>),
    Circle {
        center: Point<T>,
        radius: T,
    },
    /// `((X/semi_x)^2 + (Y/semi_y)^2 - 1` with `(X, Y) = R(angle) (p - center)`.
    Ellipse {
        center: Point<T>,
        semi_x: T,
        semi_y: T,
        angle: T,
    },
    /// `max(|X - Y|, |X + Y|) - half_diagonal` with `(X, Y) = R(angle) (p - center)`.
    TiltedSquare {
        center: Point<T>,
        half_diagonal: T,
        angle: T,
    },
}

impl<T: Real> fmt::Debug for Shape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::LevelSet(_) => f.write_str("LevelSet(..)"),
            Shape::Curve(c) => c.fmt(f),
            Shape::Circle { center, radius } => f
                .debug_struct("Circle")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            Shape::Ellipse {
                center,
                semi_x,
                semi_y,
                angle,
            } => f
                .debug_struct("Ellipse")
                .field("center", center)
                .field("semi_x", semi_x)
                .field("semi_y", semi_y)
                .field("angle", angle)
                .finish(),
            Shape::TiltedSquare {
                center,
                half_diagonal,
                angle,
            } => f
                .debug_struct("TiltedSquare")
                .field("center", center)
                .field("half_diagonal", half_diagonal)
                .field("angle", angle)
                .finish(),
        }
    }
}

/// The domain together with its root-finding settings.
#[derive(Clone, Debug)]
pub struct Geometry<T: Real> {
    shape: Shape<T>,
    root_tol: T,
    max_iter: usize,
    fd_step: T,
    projection_steps: usize,
}

impl<T: Real> Geometry<T> {
    pub fn new(shape: Shape<T>) -> Self {
        Self {
            shape,
            root_tol: T::lit(1e-12).max(T::epsilon() * T::lit(16.0)),
            max_iter: 100,
            fd_step: T::lit(1e-7).max(T::epsilon().sqrt()),
            projection_steps: 50,
        }
    }

    pub fn level_set(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Self::new(Shape::LevelSet(Arc::new(f)))
    }

    pub fn curve(curve: ParametricCurve<T>) -> Self {
        Self::new(Shape::Curve(curve))
    }

    pub fn circle(center: Point<T>, radius: T) -> Self {
        Self::new(Shape::Circle { center, radius })
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn root_tolerance(&self) -> T {
        self.root_tol
    }

    pub fn with_root_tolerance(mut self, tol: T) -> Self {
        self.root_tol = tol;
        self
    }

    /// Step used for central-difference gradients of generic level sets.
    pub fn with_fd_step(mut self, step: T) -> Self {
        self.fd_step = step;
        self
    }

    /// True when the level set is the signed distance to a parametric curve.
    pub fn is_parametric(&self) -> bool {
        matches!(self.shape, Shape::Curve(_))
    }

    /// `psi(x, y)`: negative strictly inside the domain.
    pub fn eval(&self, x: T, y: T) -> T {
        let p = Point::new(x, y);
        match &self.shape {
            Shape::LevelSet(f) => f(x, y),
            Shape::Curve(c) => c.signed_distance(p),
            Shape::Circle { center, radius } => (p - *center).dot(p - *center) - *radius * *radius,
            Shape::Ellipse { .. } => {
                let q = self.ellipse_local(p);
                q.dot(q) - T::one()
            }
            Shape::TiltedSquare {
                center,
                half_diagonal,
                angle,
            } => {
                let q = (p - *center).rotate(*angle);
                (q.x - q.y).abs().max((q.x + q.y).abs()) - *half_diagonal
            }
        }
    }

    pub fn eval_at(&self, p: Point<T>) -> T {
        self.eval(p.x, p.y)
    }

    /// Coordinates scaled so that the ellipse is the unit circle.
    fn ellipse_local(&self, p: Point<T>) -> Point<T> {
        match &self.shape {
            Shape::Ellipse {
                center,
                semi_x,
                semi_y,
                angle,
            } => {
                let q = (p - *center).rotate(*angle);
                Point::new(q.x / *semi_x, q.y / *semi_y)
            }
            Shape::Circle { center, radius } => (p - *center) * (T::one() / *radius),
            _ => unreachable!("ellipse_local on non-quadric shape"),
        }
    }

    /// For circles and ellipses: parameters `s >= s_min` at which
    /// `base + s * dir` meets the boundary, smallest first.
    fn quadric_roots(&self, base: Point<T>, dir: Point<T>) -> Option<(T, T)> {
        let (l0, d) = match &self.shape {
            Shape::Circle { center, radius } => {
                let inv = T::one() / *radius;
                ((base - *center) * inv, dir * inv)
            }
            Shape::Ellipse {
                semi_x,
                semi_y,
                angle,
                ..
            } => {
                let l0 = self.ellipse_local(base);
                let r = dir.rotate(*angle);
                (l0, Point::new(r.x / *semi_x, r.y / *semi_y))
            }
            _ => return None,
        };
        let a = d.dot(d);
        let b = T::lit(2.0) * l0.dot(d);
        let c = l0.dot(l0) - T::one();
        let disc = b * b - T::lit(4.0) * a * c;
        if disc < T::zero() {
            return None;
        }
        let sq = disc.sqrt();
        // numerically stable pair
        let q = -(b + b.signum() * sq) / T::lit(2.0);
        let (r1, r2) = if q == T::zero() {
            (T::zero(), T::zero())
        } else {
            (q / a, c / q)
        };
        Some((r1.min(r2), r1.max(r2)))
    }

    /// Intersection of the grid line `{axis-coordinate varies, other = fixed}`
    /// with the boundary inside `[lo, hi]`.
    pub fn line_intersection(&self, axis: Axis, fixed: T, lo: T, hi: T) -> Result<T> {
        let at = |s: T| match axis {
            Axis::X => Point::new(s, fixed),
            Axis::Y => Point::new(fixed, s),
        };
        let (flo, fhi) = (self.eval_at(at(lo)), self.eval_at(at(hi)));
        if flo.signum() == fhi.signum() && flo != T::zero() && fhi != T::zero() {
            return Err(EbError::NoIntersection {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        if let Some((r1, r2)) = self.quadric_roots(at(T::zero()), axis.unit()) {
            let (left, right) = if lo < hi { (lo, hi) } else { (hi, lo) };
            let slack = T::epsilon() * T::lit(64.0) * (T::one() + left.abs().max(right.abs()));
            for r in [r1, r2] {
                if r >= left - slack && r <= right + slack {
                    return Ok(r.max(left).min(right));
                }
            }
        }
        bracketed_secant(|s| self.eval_at(at(s)), lo, hi, self.root_tol, self.max_iter)
    }

    /// Closest boundary point to `p`.
    pub fn closest_point(&self, p: Point<T>) -> Result<Point<T>> {
        match &self.shape {
            Shape::Circle { center, radius } => {
                let d = p - *center;
                let n = d.norm();
                if n == T::zero() {
                    Ok(*center + Point::new(*radius, T::zero()))
                } else {
                    Ok(*center + d * (*radius / n))
                }
            }
            Shape::Curve(c) => Ok(c.closest(p).1),
            Shape::Ellipse {
                center,
                semi_x,
                semi_y,
                angle,
            } => {
                let (c, a, b, ang) = (*center, *semi_x, *semi_y, *angle);
                let q = (p - c).rotate(ang);
                let t = ellipse_closest_parameter(a, b, q);
                let local = Point::new(a * t.cos(), b * t.sin());
                Ok(c + local.rotate(-ang))
            }
            Shape::TiltedSquare {
                center,
                half_diagonal,
                angle,
            } => {
                let q = (p - *center).rotate(*angle);
                let r = *half_diagonal;
                let z = T::zero();
                let v = [
                    Point::new(r, z),
                    Point::new(z, r),
                    Point::new(-r, z),
                    Point::new(z, -r),
                ];
                let mut best = (T::infinity(), v[0]);
                for k in 0..4 {
                    let c = closest_on_segment(q, v[k], v[(k + 1) % 4]);
                    let d = c.distance(q);
                    if d < best.0 {
                        best = (d, c);
                    }
                }
                Ok(*center + best.1.rotate(-*angle))
            }
            Shape::LevelSet(_) => self.project_to_zero_set(p),
        }
    }

    /// Projection onto the zero set followed by tangential corrections
    /// until `p - x` is normal to the boundary.
    fn project_to_zero_set(&self, p: Point<T>) -> Result<Point<T>> {
        let mut x = self.newton_project(p)?;
        let tol = T::epsilon().sqrt() * T::lit(10.0);
        for _ in 0..self.projection_steps {
            let g = self.gradient(x);
            let gn = g.norm();
            if gn == T::zero() || !gn.is_finite() {
                break;
            }
            let tangent = Point::new(-g.y, g.x) * (T::one() / gn);
            let s = (p - x).dot(tangent);
            if s.abs() <= tol * ((p - x).norm() + self.fd_step) {
                return Ok(x);
            }
            x = self.newton_project(x + tangent * s)?;
        }
        let g = self.gradient(x);
        let residual = if g.norm() > T::zero() {
            (p - x).cross(g).abs() / g.norm()
        } else {
            T::zero()
        };
        Err(EbError::ClosestPointNotConverged {
            x: x.x.as_f64(),
            y: x.y.as_f64(),
            residual: residual.as_f64(),
        })
    }

    fn gradient(&self, x: Point<T>) -> Point<T> {
        let h = self.fd_step;
        let two_h = T::lit(2.0) * h;
        Point::new(
            (self.eval(x.x + h, x.y) - self.eval(x.x - h, x.y)) / two_h,
            (self.eval(x.x, x.y + h) - self.eval(x.x, x.y - h)) / two_h,
        )
    }

    /// `x <- x - psi grad(psi) / |grad(psi)|^2` until `|psi|` is below the
    /// root tolerance.
    fn newton_project(&self, p: Point<T>) -> Result<Point<T>> {
        let mut x = p;
        let mut psi = self.eval_at(x);
        for _ in 0..self.projection_steps {
            if psi.abs() <= self.root_tol {
                return Ok(x);
            }
            let g = self.gradient(x);
            let g2 = g.dot(g);
            if g2 == T::zero() || !g2.is_finite() {
                break;
            }
            x = x - g * (psi / g2);
            psi = self.eval_at(x);
        }
        if psi.abs() <= self.root_tol {
            return Ok(x);
        }
        Err(EbError::ClosestPointNotConverged {
            x: x.x.as_f64(),
            y: x.y.as_f64(),
            residual: psi.abs().as_f64(),
        })
    }

    /// Signed distance to the boundary, negative inside.
    pub fn signed_distance(&self, p: Point<T>) -> Result<T> {
        if let Shape::Curve(c) = &self.shape {
            return Ok(c.signed_distance(p));
        }
        let q = self.closest_point(p)?;
        let d = q.distance(p);
        Ok(if self.eval_at(p) < T::zero() { -d } else { d })
    }

    /// Boundary point hit by the ray from `from` along `toward - from`
    /// rotated counterclockwise by `angle`.
    ///
    /// `from` must lie inside. The ray is marched in increments of `step`
    /// up to `max_len` and the first sign change of `psi` is refined.
    pub fn rotated_ray_intersection(
        &self,
        from: Point<T>,
        toward: Point<T>,
        angle: T,
        step: T,
        max_len: T,
    ) -> Result<Point<T>> {
        let base = toward - from;
        if base.norm() == T::zero() {
            return Err(EbError::Contract(
                "rotated ray needs two distinct points".into(),
            ));
        }
        let dir = base.rotate(angle).normalized();
        let miss = || EbError::RayMiss {
            x: from.x.as_f64(),
            y: from.y.as_f64(),
        };
        if let Some((r1, r2)) = self.quadric_roots(from, dir) {
            let s = if r1 >= T::zero() { r1 } else { r2 };
            if s >= T::zero() && s <= max_len {
                return Ok(from + dir * s);
            }
            return Err(miss());
        }
        let at = |s: T| from + dir * s;
        let mut prev = T::zero();
        let mut s = step;
        while s <= max_len + step {
            if self.eval_at(at(s)) >= T::zero() {
                let r = bracketed_secant(
                    |s| self.eval_at(at(s)),
                    prev,
                    s,
                    self.root_tol,
                    self.max_iter,
                )?;
                return Ok(at(r));
            }
            prev = s;
            s += step;
        }
        Err(miss())
    }
}

/// Distance from an inside sample to the boundary along a grid line,
/// estimated by linear interpolation of the level set between the inside
/// sample (`psi_in < 0`) and the next sample outward (`psi_out >= 0`).
pub fn approx_boundary_distance<T: Real>(psi_in: T, psi_out: T, h: T) -> Result<T> {
    let denom = psi_in - psi_out;
    if denom == T::zero() {
        return Err(EbError::DegenerateSample);
    }
    let d = psi_in / denom * h;
    Ok(d.max(T::zero()).min(h))
}

fn closest_on_segment<T: Real>(p: Point<T>, a: Point<T>, b: Point<T>) -> Point<T> {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.dot(ab)).max(T::zero()).min(T::one());
    a + ab * t
}

/// Parameter `t` of the point `(a cos t, b sin t)` closest to `q`.
fn ellipse_closest_parameter<T: Real>(a: T, b: T, q: Point<T>) -> T {
    // sample, then Newton on the stationarity condition
    let n = 256;
    let two_pi = T::PI() + T::PI();
    let dist2 = |t: T| {
        let d = Point::new(a * t.cos(), b * t.sin()) - q;
        d.dot(d)
    };
    let mut best = (T::infinity(), T::zero());
    for k in 0..n {
        let t = two_pi * T::of(k) / T::of(n);
        let d = dist2(t);
        if d < best.0 {
            best = (d, t);
        }
    }
    let dt = two_pi / T::of(n);
    let mut t = root::golden_min(dist2, best.1 - dt, best.1 + dt, 40);
    for _ in 0..10 {
        let (s, c) = t.sin_cos();
        // g(t) = (c(t) - q) . c'(t)
        let g = (a * c - q.x) * (-a * s) + (b * s - q.y) * (b * c);
        let dg = (a * a - b * b) * (s * s - c * c) + q.x * a * c + q.y * b * s;
        if dg <= T::zero() {
            break;
        }
        let next = t - g / dg;
        if (next - best.1).abs() > dt || dist2(next) > dist2(t) {
            break;
        }
        t = next;
    }
    t
}
