use crate::error::{EbError, Result};
use crate::Real;

/// Safeguarded secant iteration on a sign-changing bracket.
///
/// Secant steps are taken from the two latest iterates; a step leaving the
/// bracket, or two steps in a row that fail to halve it, falls back to
/// bisection. Returns once `|f| <= tol` or the bracket has collapsed to
/// round-off.
pub(crate) fn bracketed_secant<T: Real>(
    f: impl Fn(T) -> T,
    lo: T,
    hi: T,
    tol: T,
    max_iter: usize,
) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(EbError::NoIntersection {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let two = T::lit(2.0);
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    let mut width = (b - a).abs();
    let mut slow = 0;
    let mut last = (x1, f1);
    for _ in 0..max_iter {
        let mut x = if f1 != f0 {
            x1 - f1 * (x1 - x0) / (f1 - f0)
        } else {
            (a + b) / two
        };
        let (left, right) = if a < b { (a, b) } else { (b, a) };
        if !x.is_finite() || x <= left || x >= right || slow >= 2 {
            x = (a + b) / two;
            slow = 0;
        }
        let fx = f(x);
        last = (x, fx);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let _ = fb;
        x0 = x1;
        f0 = f1;
        x1 = x;
        f1 = fx;
        let new_width = (b - a).abs();
        if new_width > width / two {
            slow += 1;
        } else {
            slow = 0;
        }
        width = new_width;
        let scale = a.abs().max(b.abs()).max(T::one());
        if width <= T::epsilon() * T::lit(4.0) * scale {
            return Ok(x);
        }
    }
    Err(EbError::RootNotConverged {
        iterations: max_iter,
        residual: last.1.abs().as_f64(),
    })
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_min<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, iterations: usize) -> T {
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secant_on_linear_function_is_exact() {
        let r = bracketed_secant(|x: f64| x - 0.3, 0.0, 1.0, 1e-12, 100).unwrap();
        assert!((r - 0.3).abs() < 1e-14);
    }

    #[test]
    fn no_sign_change_is_reported() {
        let e = bracketed_secant(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 100).unwrap_err();
        assert!(matches!(e, EbError::NoIntersection { .. }));
    }

    #[test]
    fn flat_function_falls_back_to_bisection() {
        // x^9 is extremely flat near the root; pure secant crawls.
        let r = bracketed_secant(|x: f64| (x - 0.1).powi(9), -1.0, 2.0, 1e-300, 200).unwrap();
        assert!((r - 0.1).abs() < 1e-10);
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let m = golden_min(|x: f64| (x - 0.7).powi(2), 0.0, 1.0, 80);
        assert!((m - 0.7).abs() < 1e-7);
    }
}
