//! Built-in geometries used by the benchmark problems.

use super::{Geometry, ParametricCurve, Point, Shape};
use crate::error::{EbError, Result};
use crate::Real;

/// Default number of uniform parameter samples for closest-point guesses.
pub const DEFAULT_N_GUESS: usize = 1000;

/// Two overlapping Gaussian bumps: a non-convex "glass" in `[0,1]^2`.
pub fn glass<T: Real>() -> Geometry<T> {
    Geometry::level_set(glass_psi::<T>)
}

pub fn glass_psi<T: Real>(x: T, y: T) -> T {
    let k = T::lit(20.0);
    let (a, b, c) = (T::lit(0.25), T::lit(0.75), T::lit(0.5));
    let g1 = (-k * ((x - a).powi(2) + (y - c).powi(2))).exp();
    let g2 = (-k * ((x - b).powi(2) + (y - c).powi(2))).exp();
    T::lit(0.5) - g1 - g2
}

/// Unit-half-diagonal square centred at `(0.691, 0.357)`, rotated by `0.313 pi`.
pub fn tilted_square<T: Real>() -> Geometry<T> {
    Geometry::new(Shape::TiltedSquare {
        center: Point::new(T::lit(0.691), T::lit(0.357)),
        half_diagonal: T::one(),
        angle: T::lit(0.313) * T::PI(),
    })
}

/// Bone-shaped closed curve.
pub fn bone<T: Real>(n_guess: usize) -> Geometry<T> {
    let l = T::lit;
    let curve = ParametricCurve::new(
        move |t: T| {
            Point::new(
                l(0.6) * t.cos() - l(0.3) * (l(3.0) * t).cos(),
                l(1.5) + l(0.7) * t.sin() - l(0.07) * (l(3.0) * t).sin()
                    + l(0.2) * (l(7.0) * t).sin(),
            )
        },
        move |t: T| {
            Point::new(
                -l(0.6) * t.sin() + l(0.9) * (l(3.0) * t).sin(),
                l(0.7) * t.cos() - l(0.21) * (l(3.0) * t).cos() + l(1.4) * (l(7.0) * t).cos(),
            )
        },
        T::zero(),
        T::TAU(),
        n_guess,
    );
    Geometry::curve(curve)
}

/// Five-armed star centred at `(0.02 sqrt 5, 0.02 sqrt 5)`.
pub fn star<T: Real>(n_guess: usize) -> Geometry<T> {
    let l = T::lit;
    let c = l(0.02) * l(5.0).sqrt();
    let curve = ParametricCurve::new(
        move |t: T| {
            let r = l(0.5) + l(0.2) * (l(5.0) * t).sin();
            Point::new(c + r * t.cos(), c + r * t.sin())
        },
        move |t: T| {
            let r = l(0.5) + l(0.2) * (l(5.0) * t).sin();
            let dr = (l(5.0) * t).cos();
            Point::new(dr * t.cos() - r * t.sin(), dr * t.sin() + r * t.cos())
        },
        T::zero(),
        T::TAU(),
        n_guess,
    );
    Geometry::curve(curve)
}

pub fn disk<T: Real>(radius: T) -> Geometry<T> {
    Geometry::circle(Point::new(T::zero(), T::zero()), radius)
}

/// `x^2/a^2 + y^2 a^2 = 1`: area `pi` for every `a`.
pub fn ellipse_fixed_area<T: Real>(a: T) -> Geometry<T> {
    Geometry::new(Shape::Ellipse {
        center: Point::new(T::zero(), T::zero()),
        semi_x: a,
        semi_y: T::one() / a,
        angle: T::zero(),
    })
}

/// Ellipse with semi-axes 4 and 2 rotated by `alpha`.
pub fn rotated_ellipse<T: Real>(alpha: T) -> Geometry<T> {
    Geometry::new(Shape::Ellipse {
        center: Point::new(T::zero(), T::zero()),
        semi_x: T::lit(4.0),
        semi_y: T::lit(2.0),
        angle: alpha,
    })
}

/// Parses `glass`, `tilted_square`, `bone`, `star`, `disk`, `disk(r)`,
/// `ellipse_fixed_area(a)` and `rotated_ellipse(alpha)`.
pub fn from_name<T: Real>(name: &str) -> Result<Geometry<T>> {
    let name = name.trim();
    let (head, arg) = match name.find('(') {
        Some(open) => {
            let close = name
                .rfind(')')
                .filter(|&c| c > open)
                .ok_or_else(|| EbError::OutOfRange(format!("malformed geometry '{name}'")))?;
            let v: f64 = name[open + 1..close].trim().parse().map_err(|_| {
                EbError::OutOfRange(format!("bad parameter in geometry '{name}'"))
            })?;
            (&name[..open], Some(T::lit(v)))
        }
        None => (name, None),
    };
    match (head, arg) {
        ("glass", None) => Ok(glass()),
        ("tilted_square", None) => Ok(tilted_square()),
        ("bone", None) => Ok(bone(DEFAULT_N_GUESS)),
        ("star", None) => Ok(star(DEFAULT_N_GUESS)),
        ("disk", None) => Ok(disk(T::one())),
        ("disk", Some(r)) => Ok(disk(r)),
        ("ellipse_fixed_area", Some(a)) => Ok(ellipse_fixed_area(a)),
        ("rotated_ellipse", Some(a)) => Ok(rotated_ellipse(a)),
        _ => Err(EbError::OutOfRange(format!("unknown geometry '{name}'"))),
    }
}
