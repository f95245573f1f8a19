//! Discrete error norms on grid functions.

use ebm_core::assembly::OperatorSystem;
use ebm_core::{GridContext, PointTag, ProblemSpec};

/// `E_l2 = sqrt(sum h^2 e^2)` and `E_linf = max |e|`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

/// Norms of pointwise errors `(numerical, exact)` on a grid of spacing `h`.
pub fn error_norms(pairs: impl IntoIterator<Item = (f64, f64)>, h: f64) -> Norms {
    let (mut sum, mut max) = (0.0, 0.0f64);
    for (u, e) in pairs {
        let d = u - e;
        sum += d * d;
        max = max.max(d.abs());
    }
    Norms {
        l2: (sum * h * h).sqrt(),
        linf: max,
    }
}

/// Numerical solution on the full grid: computational values plus
/// reconstructed boundary values, `None` outside.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Option<f64>>,
    /// Boundary points without a computational neighbour; excluded from norms.
    pub isolated: Vec<(usize, usize)>,
}

impl GridFunction {
    pub fn assemble(sys: &OperatorSystem<f64>, problem: &ProblemSpec<f64>, ctx: &GridContext<f64>, u: &[f64], t: f64) -> Self {
        let grid = &ctx.grid;
        let mut values = vec![None; grid.len()];
        for (k, &(i, j)) in ctx.class.comp_points().iter().enumerate() {
            values[grid.linear(i, j)] = Some(u[k]);
        }
        let mut isolated = Vec::new();
        for bv in sys.reconstruct_boundary_values(problem, ctx, u, t) {
            if bv.isolated {
                isolated.push(bv.ij);
            } else {
                values[grid.linear(bv.ij.0, bv.ij.1)] = Some(bv.value);
            }
        }
        Self {
            nx: grid.nx,
            ny: grid.ny,
            values,
            isolated,
        }
    }

    pub fn get(&self, i: isize, j: isize) -> Option<f64> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        self.values[j as usize * self.nx + i as usize]
    }
}

/// Error over computational and (non-isolated) boundary points.
pub fn solution_error(gf: &GridFunction, ctx: &GridContext<f64>, exact: impl Fn(f64, f64) -> f64) -> Norms {
    let grid = &ctx.grid;
    let pairs = (0..grid.ny).flat_map(|j| (0..grid.nx).map(move |i| (i, j))).filter_map(|(i, j)| {
        gf.values[grid.linear(i, j)].map(|u| {
            let p = grid.point(i, j);
            (u, exact(p.x, p.y))
        })
    });
    error_norms(pairs, grid.h)
}

/// Gradient error at computational points: central differences when both
/// neighbours along an axis are computational, second-order one-sided
/// differences into the computational region otherwise, and central
/// differences through reconstructed boundary values as a last resort.
pub fn gradient_error(gf: &GridFunction, ctx: &GridContext<f64>, exact: impl Fn(f64, f64) -> (f64, f64)) -> Norms {
    let grid = &ctx.grid;
    let h = grid.h;
    let comp = |i: isize, j: isize| {
        i >= 0
            && j >= 0
            && (i as usize) < grid.nx
            && (j as usize) < grid.ny
            && ctx.class.tag(i as usize, j as usize) == PointTag::Computational
    };
    let derivative = |i: isize, j: isize, (di, dj): (isize, isize)| -> Option<f64> {
        let at = |k: isize| gf.get(i + k * di, j + k * dj);
        let is_comp = |k: isize| comp(i + k * di, j + k * dj);
        if is_comp(1) && is_comp(-1) {
            return Some((at(1)? - at(-1)?) / (2.0 * h));
        }
        if is_comp(-1) && is_comp(-2) {
            return Some((3.0 * at(0)? - 4.0 * at(-1)? + at(-2)?) / (2.0 * h));
        }
        if is_comp(1) && is_comp(2) {
            return Some((-3.0 * at(0)? + 4.0 * at(1)? - at(2)?) / (2.0 * h));
        }
        Some((at(1)? - at(-1)?) / (2.0 * h))
    };
    let mut pairs = Vec::with_capacity(ctx.n_comp());
    for &(i, j) in ctx.class.comp_points() {
        let (ii, jj) = (i as isize, j as isize);
        let (Some(gx), Some(gy)) = (derivative(ii, jj, (1, 0)), derivative(ii, jj, (0, 1))) else {
            continue;
        };
        let p = grid.point(i, j);
        let (ex, ey) = exact(p.x, p.y);
        pairs.push(((gx - ex).hypot(gy - ey), 0.0));
    }
    error_norms(pairs, h)
}

/// `log2(E(h) / E(h/2))` between consecutive levels, scaled by the actual
/// spacing ratio when the sweep is not dyadic.
pub fn rate(coarse: (f64, f64), fine: (f64, f64)) -> Option<f64> {
    let ((h0, e0), (h1, e1)) = (coarse, fine);
    if e0 > 0.0 && e1 > 0.0 && h0 > h1 {
        Some((e0 / e1).ln() / (h0 / h1).ln())
    } else {
        None
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ebm_core::assembly::{assemble, AssemblyOptions};
    use ebm_core::geometry::shapes;
    use ebm_core::{Coefficient, Grid};

    #[test]
    fn hand_computed_norms() {
        let n = error_norms([(3.0, 0.0), (0.0, 4.0)], 1.0);
        assert_eq!(n, Norms { l2: 5.0, linf: 4.0 });
        assert_eq!(error_norms([(1.5, 1.5); 4], 0.1), Norms::default());
    }

    #[test]
    fn rates_and_fits() {
        assert!((rate((0.1, 4e-2), (0.05, 1e-2)).unwrap() - 2.0).abs() < 1e-12);
        assert!(rate((0.1, 0.0), (0.05, 1e-2)).is_none());
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(0.19))).collect();
        assert!((fit_exponent(&pts).unwrap() - 0.19).abs() < 1e-12);
    }

    fn setup(u: fn(f64, f64) -> f64) -> (GridFunction, GridContext<f64>) {
        let p = ProblemSpec::poisson(shapes::disk(0.8), Coefficient::Constant(1.0), |_, _| 0.0, u);
        let ctx = GridContext::new(Grid::square(-1.0, 1.0, 40).unwrap(), &p.geometry).unwrap();
        let sys = assemble(&p, &ctx, AssemblyOptions::default()).unwrap();
        let exact: Vec<f64> = sys.points.iter().map(|q| u(q.x, q.y)).collect();
        (GridFunction::assemble(&sys, &p, &ctx, &exact, 0.0), ctx)
    }

    #[test]
    fn exact_linear_field_has_no_error() {
        let (gf, ctx) = setup(|x, y| 2.0 * x - y + 0.5);
        assert!(solution_error(&gf, &ctx, |x, y| 2.0 * x - y + 0.5).linf < 1e-12);
        assert!(gradient_error(&gf, &ctx, |_, _| (2.0, -1.0)).linf < 1e-12);
    }

    #[test]
    fn central_differences_are_exact_on_quadratics_inside() {
        let (gf, ctx) = setup(|x, _| x * x);
        let inner = |x: f64, y: f64| x.hypot(y) < 0.6;
        let grid = &ctx.grid;
        for &(i, j) in ctx.class.comp_points() {
            let p = grid.point(i, j);
            if inner(p.x, p.y) {
                let (ii, jj) = (i as isize, j as isize);
                let gx = (gf.get(ii + 1, jj).unwrap() - gf.get(ii - 1, jj).unwrap()) / (2.0 * grid.h);
                assert!((gx - 2.0 * p.x).abs() < 1e-12);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn norm_bounds(errs in proptest::collection::vec(-1e3f64..1e3, 1..50), h in 1e-3f64..1.0) {
            let n = error_norms(errs.iter().map(|&e| (e, 0.0)), h);
            let max = errs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            proptest::prop_assert_eq!(n.linf, max);
            proptest::prop_assert!(n.l2 <= h * (errs.len() as f64).sqrt() * max * (1.0 + 1e-12));
        }

        #[test]
        fn rate_recovers_power_laws(p in 0.5f64..4.0, c in 1e-6f64..1e3, h in 1e-3f64..0.5) {
            let r = rate((h, c * h.powf(p)), (h / 2.0, c * (h / 2.0).powf(p))).unwrap();
            proptest::prop_assert!((r - p).abs() < 1e-9);
        }
    }
}
