//! Quantities of interest swept over a geometry parameter.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::norms::GridFunction;
use crate::problems::{self, NamedProblem};
use crate::runs::{solve_stationary, Settings};
use ebm_core::GridContext;

/// Which geometry family is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Fixed-area ellipse with `a = 2^s`, `s` uniform in `[-1, 1]`.
    Ellipse,
    /// Rotated ellipse with `alpha` uniform in `[0, 2 pi)`.
    Rotated,
}

impl std::str::FromStr for Family {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ellipse" => Ok(Self::Ellipse),
            "rotated" | "rotated_ellipse" => Ok(Self::Rotated),
            _ => Err(HarnessError::Config(format!("unknown QOI family `{s}`"))),
        }
    }
}

impl Family {
    pub fn parameters(self, samples: usize) -> Vec<f64> {
        match self {
            Self::Ellipse => (0..samples)
                .map(|k| {
                    let s = if samples == 1 { 0.0 } else { -1.0 + 2.0 * k as f64 / (samples - 1) as f64 };
                    2f64.powf(s)
                })
                .collect(),
            Self::Rotated => (0..samples)
                .map(|k| 2.0 * std::f64::consts::PI * k as f64 / samples as f64)
                .collect(),
        }
    }

    pub fn problem(self, param: f64) -> NamedProblem {
        match self {
            Self::Ellipse => problems::ellipse_fixed_area(param),
            Self::Rotated => problems::rotated_ellipse(param),
        }
    }

    fn periodic(self) -> bool {
        self == Self::Rotated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QoiRow {
    pub param: f64,
    /// `u(0, 0)` by bilinear interpolation.
    pub qoi_point: Option<f64>,
    pub dqoi_point: Option<f64>,
    /// `h^2 sum u` over computational points in `[-1,1] x [-0.5,0.5]`.
    pub qoi_integral: Option<f64>,
    pub dqoi_integral: Option<f64>,
    #[serde(rename = "E_linf")]
    pub e_linf: Option<f64>,
    pub iters: Option<usize>,
    pub error: String,
}

/// Bilinear interpolation of a grid function at `(x, y)`.
pub fn bilinear(gf: &GridFunction, ctx: &GridContext<f64>, x: f64, y: f64) -> Option<f64> {
    let grid = &ctx.grid;
    let (sx, sy) = ((x - grid.x_lo) / grid.h, (y - grid.y_lo) / grid.h);
    if sx < 0.0 || sy < 0.0 {
        return None;
    }
    let (i, j) = (sx.floor() as isize, sy.floor() as isize);
    let (fx, fy) = (sx - i as f64, sy - j as f64);
    let mut sum = 0.0;
    for (di, dj, w) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        if w != 0.0 {
            sum += w * gf.get(i + di, j + dj)?;
        }
    }
    Some(sum)
}

/// `h^2 sum u` over computational points inside the axis-aligned box.
pub fn box_integral(u: &[f64], ctx: &GridContext<f64>, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> f64 {
    let grid = &ctx.grid;
    let sum: f64 = ctx
        .class
        .comp_points()
        .iter()
        .zip(u)
        .filter(|(&(i, j), _)| {
            let p = grid.point(i, j);
            (x0..=x1).contains(&p.x) && (y0..=y1).contains(&p.y)
        })
        .map(|(_, v)| v)
        .sum();
    grid.h * grid.h * sum
}

/// Solves every parameter sample at resolution `n` (in parallel; rows keep
/// parameter order) and fills the central-difference derivatives.
pub fn qoi_sweep(family: Family, samples: usize, n: usize, settings: Settings) -> Vec<QoiRow> {
    let params = family.parameters(samples);
    let mut rows: Vec<QoiRow> = params
        .par_iter()
        .map(|&param| match solve_stationary(&family.problem(param), n, settings) {
            Ok(run) => QoiRow {
                param,
                qoi_point: bilinear(&run.solution, &run.ctx, 0.0, 0.0),
                dqoi_point: None,
                qoi_integral: Some(box_integral(&run.u, &run.ctx, (-1.0, 1.0), (-0.5, 0.5))),
                dqoi_integral: None,
                e_linf: run.error.map(|e| e.linf),
                iters: Some(run.iterations),
                error: String::new(),
            },
            Err(e) => {
                log::error!("QOI sample {param}: {e}");
                QoiRow {
                    param,
                    qoi_point: None,
                    dqoi_point: None,
                    qoi_integral: None,
                    dqoi_integral: None,
                    e_linf: None,
                    iters: None,
                    error: e.to_string(),
                }
            }
        })
        .collect();
    let point: Vec<_> = rows.iter().map(|r| r.qoi_point).collect();
    let integral: Vec<_> = rows.iter().map(|r| r.qoi_integral).collect();
    let dp = central_differences(&params, &point, family.periodic());
    let di = central_differences(&params, &integral, family.periodic());
    for (k, row) in rows.iter_mut().enumerate() {
        row.dqoi_point = dp[k];
        row.dqoi_integral = di[k];
    }
    rows
}

/// `(q[k+1] - q[k-1]) / (p[k+1] - p[k-1])`; one-sided at the ends unless
/// the parameter is periodic with period `2 pi`.
pub fn central_differences(params: &[f64], q: &[Option<f64>], periodic: bool) -> Vec<Option<f64>> {
    let n = params.len();
    (0..n)
        .map(|k| {
            if n < 2 {
                return None;
            }
            let (lo, hi, shift) = if periodic {
                let lo = (k + n - 1) % n;
                let hi = (k + 1) % n;
                let span = params[hi] - params[lo] + if hi < lo { 2.0 * std::f64::consts::PI } else { 0.0 };
                (lo, hi, span)
            } else {
                let lo = k.saturating_sub(1);
                let hi = (k + 1).min(n - 1);
                (lo, hi, params[hi] - params[lo])
            };
            Some((q[hi]? - q[lo]?) / shift)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_differences_exact_on_quadratics_interior() {
        let p: Vec<f64> = (0..6).map(|k| k as f64 * 0.5).collect();
        let q: Vec<Option<f64>> = p.iter().map(|x| Some(x * x)).collect();
        let d = central_differences(&p, &q, false);
        for k in 1..5 {
            assert!((d[k].unwrap() - 2.0 * p[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_differences_wrap() {
        let n = 64;
        let p: Vec<f64> = (0..n).map(|k| 2.0 * std::f64::consts::PI * k as f64 / n as f64).collect();
        let q: Vec<Option<f64>> = p.iter().map(|a| Some(a.sin())).collect();
        let d = central_differences(&p, &q, true);
        for k in 0..n {
            assert!((d[k].unwrap() - p[k].cos()).abs() < 1e-2);
        }
    }

    #[test]
    fn ellipse_parameters_pair_reciprocals() {
        let p = Family::Ellipse.parameters(41);
        assert!((p[20] - 1.0).abs() < 1e-15);
        for k in 0..41 {
            assert!((p[k] * p[40 - k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_value_propagates() {
        let d = central_differences(&[0.0, 1.0, 2.0], &[Some(0.0), None, Some(2.0)], false);
        assert_eq!(d, vec![None, Some(1.0), None]);
    }
}
