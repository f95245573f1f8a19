//! A-priori positive definiteness certificate for constant-coefficient
//! operators.
//!
//! Along each grid line the directional part of `A / |beta|` is block
//! diagonal with tridiagonal blocks `D(n)(a, b)`: `a` and `b` on the two end
//! diagonals, 2 inside, -1 off the diagonal. The operator is positive
//! definite when every block in both directions is.

use std::fmt::{self, Write as _};

use crate::assembly::OperatorSystem;
use crate::error::{EbError, Result};
use crate::grid::Segment;
use crate::linalg::Csr;
use crate::Real;

/// Which condition decided a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `n = 1`, `a > 0`.
    Single,
    /// `n = 2`, `a > 0`, `ab > 1`.
    Pair,
    /// `n >= 3`, `a > 1`, `b > 1`.
    Corollary,
    /// `n >= 3`, the three inequalities of the general bound.
    General,
    /// No condition holds.
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentCheck<T> {
    pub n: usize,
    pub a: T,
    pub b: T,
    pub certified: bool,
    pub condition: Condition,
    /// Smallest `lhs - rhs` over the inequalities of the deciding (or, on
    /// failure, the last tried) condition.
    pub margin: T,
}

/// `lhs > rhs` with a margin that must exceed the rounding error of the two
/// sides, so a case that holds only by round-off is rejected.
fn strictly_greater<T: Real>(lhs: T, rhs: T) -> (bool, T) {
    let margin = lhs - rhs;
    let guard = T::lit(16.0) * T::epsilon() * (lhs.abs() + rhs.abs());
    (margin > guard, margin)
}

fn all_greater<T: Real>(pairs: &[(T, T)]) -> (bool, T) {
    pairs.iter().fold((true, T::infinity()), |(ok, m), &(l, r)| {
        let (g, margin) = strictly_greater(l, r);
        (ok && g, m.min(margin))
    })
}

/// Checks whether `D(n)(a, b)` is certified positive definite.
///
/// The general `n >= 3` bound `a > ((n-2)b - (n-3)) / ((n-1)b - (n-2))` is
/// tested in the equivalent product form, which is the determinant of the
/// block once the first bound keeps the denominator positive.
pub fn check_segment<T: Real>(n: usize, a: T, b: T) -> SegmentCheck<T> {
    assert!(n >= 1, "segments have at least one point");
    let (zero, one) = (T::zero(), T::one());
    let (condition, margin) = match n {
        1 => match all_greater(&[(a, zero)]) {
            (true, m) => (Condition::Single, m),
            (false, m) => (Condition::Failed, m),
        },
        2 => match all_greater(&[(a, zero), (a * b, one)]) {
            (true, m) => (Condition::Pair, m),
            (false, m) => (Condition::Failed, m),
        },
        _ => match all_greater(&[(a, one), (b, one)]) {
            (true, m) => (Condition::Corollary, m),
            (false, _) => {
                let (n1, n2, n3) = (T::of(n - 1), T::of(n - 2), T::of(n - 3));
                let general = all_greater(&[
                    (a * n1, n2),
                    (b * n1, n2),
                    (a * (n1 * b - n2), n2 * b - n3),
                ]);
                match general {
                    (true, m) => (Condition::General, m),
                    (false, m) => (Condition::Failed, m),
                }
            }
        },
    };
    SegmentCheck {
        n,
        a,
        b,
        certified: condition != Condition::Failed,
        condition,
        margin,
    }
}

/// Largest segment length the minor oracle accepts.
pub const ORACLE_MAX_N: usize = 2000;

/// Leading principal minors `Q_1 .. Q_{n-1}, P(n)` of `D(n)(a, b)` by the
/// three-term determinant recurrence.
pub fn minor_oracle<T: Real>(n: usize, a: T, b: T) -> Result<Vec<T>> {
    if n == 0 || n > ORACLE_MAX_N {
        return Err(EbError::OutOfRange(format!("minor oracle needs 1 <= n <= {ORACLE_MAX_N}, got {n}")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let two = T::lit(2.0);
    let mut minors = Vec::with_capacity(n);
    let (mut prev, mut cur) = (T::one(), a);
    minors.push(cur);
    for k in 2..=n {
        let d = if k == n { b } else { two };
        let next = d * cur - prev;
        prev = cur;
        cur = next;
        minors.push(cur);
    }
    Ok(minors)
}

/// Outcome of the operator certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    NotCertified,
    /// Variable coefficient: only diagonal dominance is reported.
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "certified",
            Verdict::NotCertified => "not-certified",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport<T> {
    pub dominant: bool,
    /// Rows with `a_kk < sum |a_km|` or `a_kk <= 0`.
    pub failing_rows: usize,
    /// Row with the smallest `a_kk - sum |a_km|`.
    pub worst_row: usize,
    pub worst_margin: T,
}

/// Weak diagonal dominance with positive diagonal, row by row.
pub fn diag_dominance<T: Real>(a: &Csr<T>) -> DominanceReport<T> {
    let mut report = DominanceReport {
        dominant: true,
        failing_rows: 0,
        worst_row: 0,
        worst_margin: T::infinity(),
    };
    for r in 0..a.n_rows() {
        let (cols, vals) = a.row(r);
        let (mut diag, mut off) = (T::zero(), T::zero());
        for (&c, &v) in cols.iter().zip(vals) {
            if c == r {
                diag = v;
            } else {
                off += v.abs();
            }
        }
        let margin = diag - off;
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_row = r;
        }
        if margin < T::zero() || diag <= T::zero() {
            report.dominant = false;
            report.failing_rows += 1;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorCertificate<T> {
    pub verdict: Verdict,
    pub x_segments: usize,
    pub y_segments: usize,
    pub failing: Vec<(Segment, SegmentCheck<T>)>,
    pub dominance: DominanceReport<T>,
}

/// Certifies the assembled operator segment by segment in both directions.
pub fn check_operator<T: Real>(sys: &OperatorSystem<T>) -> OperatorCertificate<T> {
    let dominance = diag_dominance(sys.a.csr());
    if sys.beta_const.is_none() {
        return OperatorCertificate {
            verdict: Verdict::Skipped,
            x_segments: 0,
            y_segments: 0,
            failing: Vec::new(),
            dominance,
        };
    }
    check_segments(sys.segments.iter().map(|s| (s.segment, s.a, s.b)), dominance)
}

/// Certificate from an explicit list of `(segment, a, b)`.
pub fn check_segments<T: Real>(
    segments: impl IntoIterator<Item = (Segment, T, T)>,
    dominance: DominanceReport<T>,
) -> OperatorCertificate<T> {
    let (mut nx, mut ny) = (0, 0);
    let mut failing = Vec::new();
    for (seg, a, b) in segments {
        match seg.axis {
            crate::Axis::X => nx += 1,
            crate::Axis::Y => ny += 1,
        }
        let check = check_segment(seg.len, a, b);
        if !check.certified {
            failing.push((seg, check));
        }
    }
    OperatorCertificate {
        verdict: if failing.is_empty() {
            Verdict::Certified
        } else {
            Verdict::NotCertified
        },
        x_segments: nx,
        y_segments: ny,
        failing,
        dominance,
    }
}

impl<T: Real> OperatorCertificate<T> {
    /// `key = value` report with one line per failing segment.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict = {}", self.verdict);
        let _ = writeln!(s, "x_segments = {}", self.x_segments);
        let _ = writeln!(s, "y_segments = {}", self.y_segments);
        let _ = writeln!(s, "failing_segments = {}", self.failing.len());
        let _ = writeln!(s, "diagonally_dominant = {}", self.dominance.dominant);
        let _ = writeln!(s, "non_dominant_rows = {}", self.dominance.failing_rows);
        let _ = writeln!(s, "worst_dominance_margin = {:e}", self.dominance.worst_margin);
        for (seg, c) in &self.failing {
            let _ = writeln!(
                s,
                "failing {} line={} start={} n={} a={:e} b={:e} margin={:e}",
                seg.axis, seg.line, seg.start, c.n, c.a, c.b, c.margin
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::Axis;

    #[test]
    fn segment_examples() {
        let c = check_segment(2, 0.8, 1.5);
        assert!(c.certified);
        assert_eq!(c.condition, Condition::Pair);
        let m = minor_oracle(2, 0.8, 1.5).unwrap();
        assert_abs_diff_eq!(m[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], 0.2, epsilon = 1e-15);

        let c = check_segment(3, 2.0, 2.0);
        assert_eq!(c.condition, Condition::Corollary);
        assert_eq!(minor_oracle(3, 2.0, 2.0).unwrap(), vec![2.0, 3.0, 4.0]);

        assert!(!check_segment(3, 0.6, 0.6).certified);
        let m = minor_oracle(3, 0.6, 0.6).unwrap();
        for (v, e) in m.iter().zip([0.6, 0.2, -0.48]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-14);
        }
        assert_eq!(minor_oracle(1, 5.0, 7.0).unwrap(), vec![5.0]);
        assert!(minor_oracle::<f64>(ORACLE_MAX_N + 1, 2.0, 2.0).is_err());
    }

    #[test]
    fn general_condition_beyond_corollary() {
        // a below 1 but large enough once b is generous
        let c = check_segment(4, 0.9, 3.0);
        assert_eq!(c.condition, Condition::General);
        assert!(minor_oracle(4, 0.9, 3.0).unwrap().iter().all(|&m| m > 0.0));
    }

    #[test]
    fn adversarial_segment_list_fails() {
        let seg = |axis, len| Segment { axis, line: 1, start: 1, len };
        let dom = DominanceReport {
            dominant: true,
            failing_rows: 0,
            worst_row: 0,
            worst_margin: 0.0,
        };
        let ok = check_segments([(seg(Axis::X, 3), 2.0, 2.0), (seg(Axis::Y, 1), 0.5, 0.5)], dom.clone());
        assert_eq!(ok.verdict, Verdict::Certified);
        let bad = check_segments(
            [(seg(Axis::X, 3), 2.0, 2.0), (seg(Axis::Y, 3), 0.6, 0.6)],
            dom,
        );
        assert_eq!(bad.verdict, Verdict::NotCertified);
        assert_eq!(bad.failing.len(), 1);
        assert!(bad.report().contains("failing y line=1 start=1 n=3"));
    }

    #[test]
    fn dominance_of_small_matrices() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 0.5)]);
        let r = diag_dominance(&a);
        assert!(!r.dominant);
        assert_eq!(r.worst_row, 1);
        assert_abs_diff_eq!(r.worst_margin, -0.5);
    }
}
