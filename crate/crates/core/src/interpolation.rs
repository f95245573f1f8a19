//! Elimination of boundary points from the five-point stencil.
//!
//! Every boundary point `x_BP` next to a computational point `x_ij` is
//! written as `u_BP = w_C u_ij + sum_k w_k u_D(x_k)` with boundary nodes
//! `x_k` on the interface. Because only `u_ij` appears, the correction
//! touches just the diagonal of the operator.

use std::fmt::Write as _;

use crate::error::{EbError, Result};
use crate::geometry::{Axis, Geometry, Point};
use crate::linalg::dense::solve_dense;
use crate::Real;

/// Default separation factor for distinct RBF boundary nodes.
pub const DEFAULT_EPSILON: f64 = 0.025;

/// Relative pivot tolerance of the 6x6 saddle solve.
pub const SADDLE_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Line,
    Rbf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Line => "line",
            Method::Rbf => "rbf",
        }
    }
}

/// Which interpolation to use at boundary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    /// Line-by-line where the grid line crosses the boundary right behind
    /// the boundary point, RBF elsewhere.
    #[default]
    Mixed,
    /// RBF at every boundary point.
    Rbf,
}

impl std::str::FromStr for Strategy {
    type Err = EbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mixed" => Ok(Strategy::Mixed),
            "rbf" => Ok(Strategy::Rbf),
            _ => Err(EbError::OutOfRange(format!("unknown strategy '{s}'"))),
        }
    }
}

/// Direction in which the CCW ray of Algorithm 1 had to be turned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    None,
    CounterClockwise,
    Clockwise,
}

/// One boundary datum contributing to `u_BP`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode<T> {
    pub point: Point<T>,
    pub weight: T,
}

/// `u_BP = w_c u_C + g_D`, `g_D = sum(weight * u_D(point))`, for the stencil
/// of computational point `comp` reaching `bp` along `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCorrection<T> {
    pub bp: (usize, usize),
    pub comp: (usize, usize),
    pub comp_index: usize,
    pub axis: Axis,
    pub method: Method,
    pub w_c: T,
    pub nodes: Vec<BoundaryNode<T>>,
    pub rotation: Rotation,
    /// Face coefficient of the stencil arm the correction is folded into.
    pub beta_face: T,
}

impl<T: Real> BoundaryCorrection<T> {
    /// Boundary data contribution for the data function `u_d(x, y)`.
    pub fn g_d(&self, u_d: impl Fn(T, T) -> T) -> T {
        self.nodes
            .iter()
            .fold(T::zero(), |acc, n| acc + n.weight * u_d(n.point.x, n.point.y))
    }
}

/// Lagrange weights `(g_Gamma, g_1)` of the linear interpolant through
/// `xi_gamma` and `xi_1`, evaluated at `xi_bp`.
pub fn line_weights<T: Real>(xi_gamma: T, xi_bp: T, xi_1: T) -> Result<(T, T)> {
    if !(xi_gamma <= xi_bp && xi_bp < xi_1) {
        return Err(EbError::Contract(format!(
            "line weights need xi_gamma <= xi_bp < xi_1, got {xi_gamma}, {xi_bp}, {xi_1}"
        )));
    }
    let g_gamma = (xi_bp - xi_1) / (xi_gamma - xi_1);
    let g_1 = (xi_bp - xi_gamma) / (xi_1 - xi_gamma);
    Ok((g_gamma, g_1))
}

/// Boundary nodes chosen by Algorithm 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfNodes<T> {
    pub gamma1: Point<T>,
    pub gamma2: Point<T>,
    pub rotation: Rotation,
}

/// Closest boundary points to `x_bp` and `x_ij`; when they are within
/// `eps * h` of each other the second node comes from the ray through
/// `x_Gamma1` rotated by `pi/4` about `x_bp` instead.
pub fn select_rbf_points<T: Real>(
    geom: &Geometry<T>,
    x_ij: Point<T>,
    x_bp: Point<T>,
    eps: T,
    h: T,
    reach: T,
) -> Result<RbfNodes<T>> {
    if x_ij == x_bp {
        return Err(EbError::Contract("x_ij and x_BP coincide".into()));
    }
    let gamma1 = geom.closest_point(x_bp)?;
    let gamma2 = geom.closest_point(x_ij)?;
    if gamma1.distance(gamma2) > eps * h {
        return Ok(RbfNodes {
            gamma1,
            gamma2,
            rotation: Rotation::None,
        });
    }
    rotated_nodes(geom, x_ij, x_bp, gamma1, Rotation::CounterClockwise, h, reach).or_else(|e| {
        log::debug!("counterclockwise ray from ({}, {}) failed: {e}", x_bp.x, x_bp.y);
        rotated_nodes(geom, x_ij, x_bp, gamma1, Rotation::Clockwise, h, reach)
    })
}

/// Second node from the rotated ray, with `gamma1` kept.
pub fn rotated_nodes<T: Real>(
    geom: &Geometry<T>,
    x_ij: Point<T>,
    x_bp: Point<T>,
    gamma1: Point<T>,
    rotation: Rotation,
    h: T,
    reach: T,
) -> Result<RbfNodes<T>> {
    let quarter = T::FRAC_PI_4();
    let angle = match rotation {
        Rotation::None => T::zero(),
        Rotation::CounterClockwise => quarter,
        Rotation::Clockwise => -quarter,
    };
    // a boundary point sitting on the interface has no normal direction;
    // continue the stencil direction instead
    let toward = if gamma1.distance(x_bp) > T::epsilon() * h {
        gamma1
    } else {
        x_bp + (x_bp - x_ij)
    };
    let step = h / T::lit(4.0);
    let gamma2 = geom.rotated_ray_intersection(x_bp, toward, angle, step, reach)?;
    Ok(RbfNodes {
        gamma1,
        gamma2,
        rotation,
    })
}

fn phi<T: Real>(r: T) -> T {
    r * r * r
}

/// Weights `(w_ij, w_Gamma1, w_Gamma2)` of the cubic polyharmonic spline
/// with linear augmentation through `x_ij, x_Gamma1, x_Gamma2`, evaluated at
/// `x_bp`.
///
/// Coordinates are shifted to `x_ij` and divided by the largest node
/// distance; the interpolant is invariant under both, so the weights are
/// unchanged while the saddle matrix stays well scaled.
pub fn rbf_weights<T: Real>(
    x_ij: Point<T>,
    x_bp: Point<T>,
    gamma1: Point<T>,
    gamma2: Point<T>,
) -> Result<[T; 3]> {
    let scale = x_ij
        .distance(gamma1)
        .max(x_ij.distance(gamma2))
        .max(x_ij.distance(x_bp));
    if scale == T::zero() {
        return Err(degenerate(x_bp));
    }
    let local = |p: Point<T>| (p - x_ij) * (T::one() / scale);
    let nodes = [local(x_ij), local(gamma1), local(gamma2)];
    let e = local(x_bp);
    let mut b = vec![T::zero(); 36];
    for r in 0..3 {
        for c in 0..3 {
            b[r * 6 + c] = phi(nodes[r].distance(nodes[c]));
        }
        let poly = [T::one(), nodes[r].x, nodes[r].y];
        for (k, &v) in poly.iter().enumerate() {
            b[r * 6 + 3 + k] = v;
            b[(3 + k) * 6 + r] = v;
        }
    }
    let rhs = [
        phi(e.distance(nodes[0])),
        phi(e.distance(nodes[1])),
        phi(e.distance(nodes[2])),
        T::one(),
        e.x,
        e.y,
    ];
    let z = solve_dense(6, b, &rhs, T::lit(SADDLE_PIVOT_TOL)).map_err(|_| degenerate(x_bp))?;
    Ok([z[0], z[1], z[2]])
}

fn degenerate<T: Real>(p: Point<T>) -> EbError {
    EbError::DegenerateStencil {
        x: p.x.as_f64(),
        y: p.y.as_f64(),
    }
}

/// Correction records as CSV (`bp_i,bp_j,comp_i,comp_j,axis,method,rotation,w_c,g_d`).
pub fn corrections_csv<T: Real>(
    corrections: &[BoundaryCorrection<T>],
    u_d: impl Fn(T, T) -> T,
) -> String {
    let mut s = String::from("bp_i,bp_j,comp_i,comp_j,axis,method,rotation,w_c,g_d\n");
    for c in corrections {
        let rot = match c.rotation {
            Rotation::None => "none",
            Rotation::CounterClockwise => "ccw",
            Rotation::Clockwise => "cw",
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:e},{:e}",
            c.bp.0,
            c.bp.1,
            c.comp.0,
            c.comp.1,
            c.axis,
            c.method.name(),
            rot,
            c.w_c,
            c.g_d(&u_d)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::{prop_assert, prop_assume, proptest, ProptestConfig};
    use proptest::strategy::Strategy as _;

    #[test]
    fn line_weight_examples() {
        let h = 0.1;
        assert_eq!(line_weights(0.0, 0.0, h).unwrap(), (1.0, 0.0));
        let (a, b) = line_weights(-h, 0.0, h).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-15);
        let (a, b) = line_weights(-0.3 * h, 0.0, h).unwrap();
        assert_abs_diff_eq!(a, 10.0 / 13.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 3.0 / 13.0, epsilon = 1e-15);
    }

    #[test]
    fn line_weight_ordering_is_checked() {
        assert!(line_weights(0.1, 0.0, 1.0).is_err());
        assert!(line_weights(-0.1, 1.0, 1.0).is_err());
    }

    /// Weights by solving the unscaled physical-coordinate system with
    /// nalgebra and applying the transpose formula literally.
    fn oracle_weights(x_ij: Point<f64>, x_bp: Point<f64>, g1: Point<f64>, g2: Point<f64>) -> [f64; 3] {
        let nodes = [x_ij, g1, g2];
        let mut b = DMatrix::zeros(6, 6);
        for r in 0..3 {
            for c in 0..3 {
                b[(r, c)] = nodes[r].distance(nodes[c]).powi(3);
            }
            for (k, v) in [1.0, nodes[r].x, nodes[r].y].into_iter().enumerate() {
                b[(r, 3 + k)] = v;
                b[(3 + k, r)] = v;
            }
        }
        let inv = b.try_inverse().unwrap();
        let e = DVector::from_vec(vec![
            x_bp.distance(x_ij).powi(3),
            x_bp.distance(g1).powi(3),
            x_bp.distance(g2).powi(3),
            1.0,
            x_bp.x,
            x_bp.y,
        ]);
        let w = inv.transpose() * e;
        [w[0], w[1], w[2]]
    }

    #[test]
    fn rbf_collocation() {
        let x_ij = Point::new(0.3, 0.4);
        let g1 = Point::new(0.21, 0.43);
        let g2 = Point::new(0.26, 0.49);
        let w = rbf_weights(x_ij, x_ij, g1, g2).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], 0.0, epsilon = 1e-12);
        let w = rbf_weights(x_ij, g1, g1, g2).unwrap();
        assert_abs_diff_eq!(w[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rbf_weights_match_dense_oracle() {
        let x_ij = Point::new(0.3, 0.4);
        let x_bp = Point::new(0.25, 0.4);
        let g1 = Point::new(0.21, 0.43);
        let g2 = Point::new(0.26, 0.49);
        let w = rbf_weights(x_ij, x_bp, g1, g2).unwrap();
        let o = oracle_weights(x_ij, x_bp, g1, g2);
        for k in 0..3 {
            assert_abs_diff_eq!(w[k], o[k], epsilon = 1e-10);
        }
    }

    #[test]
    fn collinear_nodes_are_degenerate() {
        let r = rbf_weights(
            Point::new(0.0, 0.0),
            Point::new(-0.1, 0.0),
            Point::new(-0.15, 0.0),
            Point::new(-0.3, 0.0),
        );
        assert!(matches!(r, Err(EbError::DegenerateStencil { .. })));
    }

    #[test]
    fn distinct_closest_points_are_kept() {
        let g = shapes::disk::<f64>(1.0);
        let h = 0.1;
        let x_ij = Point::new(0.85, 0.3);
        let x_bp = Point::new(0.85, 0.4);
        let n = select_rbf_points(&g, x_ij, x_bp, DEFAULT_EPSILON, h, 4.0).unwrap();
        assert_eq!(n.rotation, Rotation::None);
        assert_abs_diff_eq!(n.gamma1.x, x_bp.x / x_bp.norm(), epsilon = 1e-12);
        assert_abs_diff_eq!(n.gamma2.y, x_ij.y / x_ij.norm(), epsilon = 1e-12);
    }

    #[test]
    fn coinciding_closest_points_trigger_rotation() {
        // x_ij, x_BP and the centre are collinear: both project to (1, 0)
        let g = shapes::disk::<f64>(1.0);
        let h = 0.1;
        let n = select_rbf_points(&g, Point::new(0.85, 0.0), Point::new(0.95, 0.0), DEFAULT_EPSILON, h, 4.0)
            .unwrap();
        assert_eq!(n.rotation, Rotation::CounterClockwise);
        assert!(n.gamma2.y > 0.0);
        assert_abs_diff_eq!(n.gamma2.norm(), 1.0, epsilon = 1e-12);
        assert!(n.gamma1.distance(n.gamma2) > 0.0);
    }

    #[test]
    fn glass_notch_selection_matches_dense_scan() {
        let g = shapes::glass::<f64>();
        let h = 0.02;
        let x_ij = Point::new(0.46, 0.45);
        let x_bp = Point::new(0.48, 0.45);
        let n = select_rbf_points(&g, x_ij, x_bp, DEFAULT_EPSILON, h, 2.0).unwrap();
        assert_eq!(n.rotation, Rotation::None);
        for (p, q) in [(x_bp, n.gamma1), (x_ij, n.gamma2)] {
            assert!(g.eval_at(q).abs() < 1e-9);
            // no boundary sample of a fine sampling lies closer
            let mut best = f64::INFINITY;
            let m = 2000;
            for a in 0..m {
                let th = 2.0 * std::f64::consts::PI * a as f64 / m as f64;
                let d = Point::new(th.cos(), th.sin());
                if let Ok(b) = g.rotated_ray_intersection(p, p + d, 0.0, 1e-3, 1.0) {
                    best = best.min(b.distance(p));
                }
            }
            assert!(q.distance(p) <= best + 1e-6, "{} vs {best}", q.distance(p));
        }
    }

    #[test]
    fn rbf_interpolation_is_second_order() {
        let g = shapes::disk::<f64>(1.0);
        let u = |p: Point<f64>| (1.3 * p.x).sin() * (0.7 * p.y).exp();
        let mut errs = Vec::new();
        for h in [0.04, 0.02, 0.01] {
            let on = Point::new(0.6, 0.8);
            let x_bp = on - Point::new(0.4 * h, 0.0);
            let x_ij = x_bp - Point::new(h, 0.0);
            let n = select_rbf_points(&g, x_ij, x_bp, DEFAULT_EPSILON, h, 4.0).unwrap();
            let w = rbf_weights(x_ij, x_bp, n.gamma1, n.gamma2).unwrap();
            let approx = w[0] * u(x_ij) + w[1] * u(n.gamma1) + w[2] * u(n.gamma2);
            errs.push((approx - u(x_bp)).abs());
        }
        for k in 0..2 {
            let rate = (errs[k] / errs[k + 1]).log2();
            assert!(rate > 1.7, "rate {rate}, errors {errs:?}");
        }
    }

    #[test]
    fn correction_csv_lists_records() {
        let c = BoundaryCorrection {
            bp: (1, 2),
            comp: (2, 2),
            comp_index: 0,
            axis: Axis::X,
            method: Method::Line,
            w_c: 0.25,
            nodes: vec![BoundaryNode {
                point: Point::new(0.5, 0.5),
                weight: 0.75,
            }],
            rotation: Rotation::None,
            beta_face: 1.0,
        };
        let s = corrections_csv(&[c], |x, y| x + y);
        assert_eq!(s.lines().nth(1).unwrap(), "1,2,2,2,x,line,none,2.5e-1,7.5e-1");
    }

    fn admissible() -> impl proptest::strategy::Strategy<Value = (f64, f64, f64)> {
        (1e-3f64..1.0, 0.0f64..1.0, -5.0f64..5.0).prop_map(|(h, frac, shift)| {
            // xi_gamma in [xi_bp - h, xi_bp], xi_1 = xi_bp + h
            (shift - frac * h, shift, shift + h)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn line_weights_partition_unity((g, bp, one) in admissible()) {
            let (a, b) = line_weights(g, bp, one).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        }

        #[test]
        fn rbf_reproduces_linear_fields(
            cx in -1.0f64..1.0, cy in -1.0f64..1.0,
            a1 in 0.0f64..6.28, r1 in 0.2f64..1.5,
            a2 in 0.0f64..6.28, r2 in 0.2f64..1.5,
            t in 0.0f64..1.0,
            c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0,
            h in 1e-3f64..0.5,
        ) {
            let x_ij = Point::new(cx, cy);
            let g1 = x_ij + Point::new(a1.cos(), a1.sin()) * (r1 * h);
            let g2 = x_ij + Point::new(a2.cos(), a2.sin()) * (r2 * h);
            // skip nearly collinear triangles
            let area = (g1 - x_ij).cross(g2 - x_ij) / (h * h);
            prop_assume!(area.abs() > 0.05);
            let x_bp = x_ij + (g1 - x_ij) * t;
            let w = rbf_weights(x_ij, x_bp, g1, g2).unwrap();
            let f = |p: Point<f64>| c0 + c1 * p.x + c2 * p.y;
            let v = w[0] * f(x_ij) + w[1] * f(g1) + w[2] * f(g2);
            prop_assert!((v - f(x_bp)).abs() < 1e-10);
            prop_assert!((w[0] + w[1] + w[2] - 1.0).abs() < 1e-12);
        }
    }
}
