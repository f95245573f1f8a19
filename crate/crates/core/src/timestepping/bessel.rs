//! Bessel functions of the first kind and disk standing modes.

use crate::error::{EbError, Result};
use crate::Real;

pub const MAX_ORDER: usize = 20;
pub const MAX_ARGUMENT: f64 = 200.0;

/// The 7th zero of `J_7`.
pub const KAPPA_77: f64 = 31.4227941922;

/// `J_m(z)` for `m <= 20` and `0 <= z <= 200`.
///
/// Ascending series while its terms cannot grow large, Miller's backward
/// recurrence normalized by `J_0 + 2 sum J_2k = 1` otherwise.
pub fn bessel_j<T: Real>(m: usize, z: T) -> Result<T> {
    if m > MAX_ORDER {
        return Err(EbError::OutOfRange(format!("Bessel order {m} > {MAX_ORDER}")));
    }
    if !(z >= T::zero() && z <= T::lit(MAX_ARGUMENT)) {
        return Err(EbError::OutOfRange(format!("Bessel argument {}", z.as_f64())));
    }
    if z == T::zero() {
        return Ok(if m == 0 { T::one() } else { T::zero() });
    }
    if z <= T::lit(2.0) {
        Ok(series(m, z))
    } else {
        Ok(miller(m, z))
    }
}

fn series<T: Real>(m: usize, z: T) -> T {
    let half = z * T::lit(0.5);
    let q = -half * half;
    let mut term = T::one();
    for k in 1..=m {
        term = term * half / T::of(k);
    }
    let mut sum = term;
    for k in 1..200 {
        term = term * q / (T::of(k) * T::of(k + m));
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

fn miller<T: Real>(m: usize, z: T) -> T {
    let zf = z.as_f64();
    let top = m.max(zf as usize) + 20 + (40.0 * m.max(zf as usize) as f64).sqrt() as usize;
    let start = top + top % 2;
    let big = T::max_value().sqrt();
    let two_over_z = T::lit(2.0) / z;
    let (mut next, mut cur) = (T::zero(), T::min_positive_value().sqrt());
    let mut norm = T::zero();
    let mut wanted = T::zero();
    for k in (1..=start).rev() {
        // cur = J_k, next = J_{k+1} up to a common factor
        let prev = T::of(k) * two_over_z * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == m {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += T::lit(2.0) * cur;
        }
        if cur.abs() > big {
            let s = T::one() / big;
            cur *= s;
            next *= s;
            norm *= s;
            wanted *= s;
        }
    }
    // cur is now J_0
    norm += cur;
    wanted / norm
}

/// `n`th positive zero of `J_m` by bracketing and bisection.
pub fn bessel_zero<T: Real>(m: usize, n: usize) -> Result<T> {
    if n == 0 {
        return Err(EbError::OutOfRange("zeros are counted from 1".into()));
    }
    let step = T::lit(0.05);
    let mut lo = T::of(m).max(step);
    let mut f_lo = bessel_j(m, lo)?;
    let mut found = 0;
    loop {
        let hi = lo + step;
        let f_hi = bessel_j(m, hi)?;
        if f_lo * f_hi < T::zero() {
            found += 1;
            if found == n {
                let (mut a, mut b, mut fa) = (lo, hi, f_lo);
                for _ in 0..200 {
                    let mid = (a + b) * T::lit(0.5);
                    if mid <= a || mid >= b {
                        break;
                    }
                    let fm = bessel_j(m, mid)?;
                    if fa * fm <= T::zero() {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
                return Ok((a + b) * T::lit(0.5));
            }
        }
        lo = hi;
        f_lo = f_hi;
    }
}

/// `J_m(r kappa) cos(m phi) cos(kappa t)`.
pub fn standing_mode<T: Real>(r: T, phi: T, t: T, m: usize, kappa: T) -> Result<T> {
    Ok(bessel_j(m, r * kappa)? * (T::of(m) * phi).cos() * (kappa * t).cos())
}
