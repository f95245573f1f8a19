//! Five-point operator assembly with boundary-point elimination.
//!
//! The assembled matrix is `A = -h^2 L` restricted to computational points:
//! row `k` has `-beta_face` for each computational neighbour and the sum of
//! face coefficients on the diagonal. A boundary neighbour `u_BP = w_C u_k +
//! g_D` adds `beta_face (1 - w_C)` to the diagonal and `beta_face g_D` to the
//! right-hand side, so `A` keeps the five-point pattern and stays symmetric.

use rayon::prelude::*;

use crate::error::{EbError, Result};
use crate::geometry::{approx_boundary_distance, Axis, Geometry, Point};
use crate::grid::{extract_segments, Grid, GridContext, PointTag, Segment};
use crate::interpolation::{
    line_weights, rbf_weights, rotated_nodes, select_rbf_points, BoundaryCorrection, BoundaryNode, Method,
    RbfNodes, Rotation, Strategy, DEFAULT_EPSILON,
};
use crate::linalg::{Csr, SparseSym};
use crate::problem::{Coefficient, ProblemSpec};
use crate::Real;

/// Cell face of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    East,
    West,
    North,
    South,
}

impl Face {
    /// West, east, south, north: the order in which stencil arms are visited.
    pub const ALL: [Face; 4] = [Face::West, Face::East, Face::South, Face::North];

    pub fn axis(self) -> Axis {
        match self {
            Face::East | Face::West => Axis::X,
            Face::North | Face::South => Axis::Y,
        }
    }

    pub fn offset(self) -> (isize, isize) {
        match self {
            Face::East => (1, 0),
            Face::West => (-1, 0),
            Face::North => (0, 1),
            Face::South => (0, -1),
        }
    }
}

/// `beta` at the midpoint of `face` of point `(i, j)`.
///
/// The midpoint is computed from the lower cell index so both points sharing
/// a face see bit-identical coefficients.
pub fn face_coefficient<T: Real>(beta: &Coefficient<T>, grid: &Grid<T>, i: usize, j: usize, face: Face) -> T {
    let half = T::lit(0.5);
    let (x, y) = match face {
        Face::East => (grid.x_lo + (T::of(i) + half) * grid.h, grid.y(j)),
        Face::West => (grid.x_lo + (T::of(i) - half) * grid.h, grid.y(j)),
        Face::North => (grid.x(i), grid.y_lo + (T::of(j) + half) * grid.h),
        Face::South => (grid.x(i), grid.y_lo + (T::of(j) - half) * grid.h),
    };
    beta.eval(x, y)
}

/// Segment with its normalized end diagonals (interior value 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentEnds<T> {
    pub segment: Segment,
    pub a: T,
    pub b: T,
}

/// Assembled operator, right-hand side and correction records.
#[derive(Debug, Clone)]
pub struct OperatorSystem<T: Real> {
    /// `-h^2 L` over computational points (with `|beta|` when beta is a
    /// negative constant).
    pub a: SparseSym<T>,
    /// Right-hand side at `t = 0`.
    pub rhs: Vec<T>,
    pub corrections: Vec<BoundaryCorrection<T>>,
    pub strategy: Strategy,
    pub h: T,
    /// `-1` when a negative constant beta was flipped to make `A` positive.
    pub beta_sign: T,
    /// Constant beta, if any.
    pub beta_const: Option<T>,
    /// Coordinates of the unknowns.
    pub points: Vec<Point<T>>,
    /// Segments in both directions with `(a, b)`; empty for variable beta.
    pub segments: Vec<SegmentEnds<T>>,
}

/// Assembly options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions<T> {
    pub strategy: Strategy,
    /// Separation factor of Algorithm 1.
    pub epsilon: T,
    /// Time at which the base right-hand side is evaluated.
    pub t0: T,
}

impl<T: Real> Default for AssemblyOptions<T> {
    fn default() -> Self {
        Self {
            strategy: Strategy::Mixed,
            epsilon: T::lit(DEFAULT_EPSILON),
            t0: T::zero(),
        }
    }
}

impl<T: Real> AssemblyOptions<T> {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }
}

/// Assembles `A` and `b` for `problem` on `ctx`.
pub fn assemble<T: Real>(
    problem: &ProblemSpec<T>,
    ctx: &GridContext<T>,
    opts: AssemblyOptions<T>,
) -> Result<OperatorSystem<T>> {
    let n = ctx.n_comp();
    if n == 0 {
        return Err(EbError::EmptySystem);
    }
    let grid = &ctx.grid;
    let beta_sign = match problem.beta.constant() {
        Some(c) if c < T::zero() => -T::one(),
        _ => T::one(),
    };
    let beta = |i, j, face| beta_sign * face_coefficient(&problem.beta, grid, i, j, face);
    let comp = ctx.class.comp_points();

    let rows: Vec<Result<RowData<T>>> = comp
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let mut row = RowData {
                diag: T::zero(),
                off: Vec::with_capacity(4),
                corrections: Vec::new(),
            };
            for face in Face::ALL {
                let b = beta(i, j, face);
                let (di, dj) = face.offset();
                let (ni, nj) = ((i as isize + di) as usize, (j as isize + dj) as usize);
                match ctx.class.tag(ni, nj) {
                    PointTag::Computational => {
                        let m = ctx.class.comp_index(ni, nj).expect("computational point has an index");
                        row.diag += b;
                        row.off.push((m, -b));
                    }
                    PointTag::Boundary => {
                        let mut c = boundary_correction(problem, ctx, (i, j), k, face, opts)?;
                        c.beta_face = b;
                        row.diag += b * (T::one() - c.w_c);
                        row.corrections.push(c);
                    }
                    PointTag::Exterior => unreachable!("computational points have inside neighbours"),
                }
            }
            row.off.sort_by_key(|e| e.0);
            Ok(row)
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(5 * n);
    let mut vals = Vec::with_capacity(5 * n);
    let mut corrections = Vec::new();
    row_ptr.push(0);
    for (k, row) in rows.into_iter().enumerate() {
        let row = row?;
        let mut placed = false;
        for &(m, v) in &row.off {
            if m > k && !placed {
                col_idx.push(k);
                vals.push(row.diag);
                placed = true;
            }
            col_idx.push(m);
            vals.push(v);
        }
        if !placed {
            col_idx.push(k);
            vals.push(row.diag);
        }
        row_ptr.push(col_idx.len());
        corrections.extend(row.corrections);
    }
    let a = SparseSym::new(Csr::from_parts(n, n, row_ptr, col_idx, vals)?)?;

    let points: Vec<Point<T>> = comp.iter().map(|&(i, j)| grid.point(i, j)).collect();
    let beta_const = problem.beta.constant();
    let mut sys = OperatorSystem {
        a,
        rhs: Vec::new(),
        corrections,
        strategy: opts.strategy,
        h: grid.h,
        beta_sign,
        beta_const,
        points,
        segments: Vec::new(),
    };
    if beta_const.is_some() {
        sys.segments = segment_ends(&sys, ctx);
    }
    sys.rhs = sys.refresh_rhs(problem, opts.t0);
    Ok(sys)
}

struct RowData<T> {
    diag: T,
    off: Vec<(usize, T)>,
    corrections: Vec<BoundaryCorrection<T>>,
}

/// Correction for the arm of computational point `comp` through `face`.
pub fn boundary_correction<T: Real>(
    problem: &ProblemSpec<T>,
    ctx: &GridContext<T>,
    comp: (usize, usize),
    comp_index: usize,
    face: Face,
    opts: AssemblyOptions<T>,
) -> Result<BoundaryCorrection<T>> {
    let grid = &ctx.grid;
    let (di, dj) = face.offset();
    let bp = ((comp.0 as isize + di) as usize, (comp.1 as isize + dj) as usize);
    let (oi, oj) = (bp.0 as isize + di, bp.1 as isize + dj);
    let outer_outside = !ctx.mask.inside_signed(oi, oj);
    let base = BoundaryCorrection {
        bp,
        comp,
        comp_index,
        axis: face.axis(),
        method: Method::Line,
        w_c: T::zero(),
        nodes: Vec::new(),
        rotation: Rotation::None,
        beta_face: T::one(),
    };
    if opts.strategy == Strategy::Mixed && outer_outside {
        match line_correction(&problem.geometry, ctx, bp, (oi, oj), face) {
            Ok((w_c, node)) => {
                return Ok(BoundaryCorrection {
                    w_c,
                    nodes: vec![node],
                    ..base
                })
            }
            Err(EbError::NoIntersection { .. }) | Err(EbError::DegenerateSample) => {
                log::debug!("no crossing between ({}, {}) and ({oi}, {oj}); using RBF", bp.0, bp.1);
            }
            Err(e) => return Err(e),
        }
    }
    let x_ij = grid.point(comp.0, comp.1);
    let x_bp = grid.point(bp.0, bp.1);
    let (nodes, w) = rbf_correction(&problem.geometry, x_ij, x_bp, opts.epsilon, grid.h, grid.diagonal())?;
    Ok(BoundaryCorrection {
        method: Method::Rbf,
        w_c: w[0],
        nodes: vec![
            BoundaryNode {
                point: nodes.gamma1,
                weight: w[1],
            },
            BoundaryNode {
                point: nodes.gamma2,
                weight: w[2],
            },
        ],
        rotation: nodes.rotation,
        ..base
    })
}

/// Line-by-line correction: the interface crossing lies between the
/// boundary point and the next point outward.
fn line_correction<T: Real>(
    geom: &Geometry<T>,
    ctx: &GridContext<T>,
    bp: (usize, usize),
    outer: (isize, isize),
    face: Face,
) -> Result<(T, BoundaryNode<T>)> {
    let grid = &ctx.grid;
    let h = grid.h;
    let x_bp = grid.point(bp.0, bp.1);
    let dir = {
        let (di, dj) = face.offset();
        Point::new(T::lit(di as f64), T::lit(dj as f64))
    };
    let on_grid = outer.0 >= 0 && outer.1 >= 0 && (outer.0 as usize) < grid.nx && (outer.1 as usize) < grid.ny;
    let d = if geom.is_parametric() && on_grid {
        let psi_out = ctx.psi_at(outer.0 as usize, outer.1 as usize);
        approx_boundary_distance(ctx.psi_at(bp.0, bp.1), psi_out, h)?
    } else {
        let (fixed, from) = match face.axis() {
            Axis::X => (x_bp.y, x_bp.x),
            Axis::Y => (x_bp.x, x_bp.y),
        };
        let to = from + match face.axis() {
            Axis::X => dir.x,
            Axis::Y => dir.y,
        } * h;
        let xi = geom.line_intersection(face.axis(), fixed, from, to)?;
        (xi - from).abs().min(h)
    };
    // local coordinate along the arm pointing from the boundary point to
    // the computational point
    let (g_gamma, g_1) = line_weights(-d, T::zero(), h)?;
    Ok((
        g_1,
        BoundaryNode {
            point: x_bp + dir * d,
            weight: g_gamma,
        },
    ))
}

/// Relative distance (in units of `h`) below which a point is on the interface.
const ON_INTERFACE: f64 = 1e-10;

fn rbf_correction<T: Real>(
    geom: &Geometry<T>,
    x_ij: Point<T>,
    x_bp: Point<T>,
    eps: T,
    h: T,
    reach: T,
) -> Result<(RbfNodes<T>, [T; 3])> {
    // a boundary point on the interface takes the boundary datum; the RBF
    // nodes would coincide there
    let gamma1 = geom.closest_point(x_bp)?;
    if gamma1.distance(x_bp) <= T::lit(ON_INTERFACE) * h {
        let nodes = RbfNodes {
            gamma1,
            gamma2: gamma1,
            rotation: Rotation::None,
        };
        return Ok((nodes, [T::zero(), T::one(), T::zero()]));
    }
    let nodes = select_rbf_points(geom, x_ij, x_bp, eps, h, reach)?;
    match rbf_weights(x_ij, x_bp, nodes.gamma1, nodes.gamma2) {
        Ok(w) => Ok((nodes, w)),
        Err(e) => {
            // nearly collinear nodes: turn the second node off the line
            let mut last = e;
            for rot in [Rotation::CounterClockwise, Rotation::Clockwise] {
                if rot == nodes.rotation {
                    continue;
                }
                let retry = rotated_nodes(geom, x_ij, x_bp, nodes.gamma1, rot, h, reach)
                    .and_then(|n| rbf_weights(x_ij, x_bp, n.gamma1, n.gamma2).map(|w| (n, w)));
                match retry {
                    Ok(r) => return Ok(r),
                    Err(e) => last = e,
                }
            }
            Err(last)
        }
    }
}

fn segment_ends<T: Real>(sys: &OperatorSystem<T>, ctx: &GridContext<T>) -> Vec<SegmentEnds<T>> {
    let n = sys.a.dim();
    let scale = sys.beta_const.map(|b| b.abs()).unwrap_or(T::one());
    let comp = ctx.class.comp_points();
    // split every diagonal entry into its x and y arm contributions
    let mut dir_diag = [vec![T::zero(); n], vec![T::zero(); n]];
    for (k, d) in comp.iter().enumerate() {
        let (cols, vals) = sys.a.row(k);
        for (&m, &v) in cols.iter().zip(vals) {
            if m != k {
                let axis = if comp[m].0 != d.0 { Axis::X } else { Axis::Y };
                dir_diag[axis.index()][k] -= v;
            }
        }
    }
    for c in &sys.corrections {
        dir_diag[c.axis.index()][c.comp_index] += c.beta_face * (T::one() - c.w_c);
    }
    let mut out = Vec::new();
    for axis in Axis::BOTH {
        let d = &dir_diag[axis.index()];
        for segment in extract_segments(&ctx.class, axis) {
            let (fi, fj) = segment.first();
            let (li, lj) = segment.last();
            let first = ctx.class.comp_index(fi, fj).expect("segment point is computational");
            let last = ctx.class.comp_index(li, lj).expect("segment point is computational");
            out.push(SegmentEnds {
                segment,
                a: d[first] / scale,
                b: d[last] / scale,
            });
        }
    }
    out
}

impl<T: Real> OperatorSystem<T> {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Source values at the unknowns, with the sign used by the assembly.
    pub fn source_values(&self, problem: &ProblemSpec<T>, t: T) -> Vec<T> {
        self.points
            .par_iter()
            .map(|p| self.beta_sign * problem.f(p.x, p.y, t))
            .collect()
    }

    /// Boundary contribution `g_k = sum beta_face g_D` at time `t`.
    pub fn boundary_rhs(&self, problem: &ProblemSpec<T>, t: T) -> Vec<T> {
        let mut g = vec![T::zero(); self.dim()];
        for c in &self.corrections {
            g[c.comp_index] += c.beta_face * c.g_d(|x, y| problem.u_d(x, y, t));
        }
        g
    }

    /// `b = -h^2 f + g` at time `t`, using the stored weights.
    pub fn refresh_rhs(&self, problem: &ProblemSpec<T>, t: T) -> Vec<T> {
        let h2 = self.h * self.h;
        let mut b = self.boundary_rhs(problem, t);
        for (bk, f) in b.iter_mut().zip(self.source_values(problem, t)) {
            *bk -= h2 * f;
        }
        b
    }

    /// `h^2 L u = g - A u` (in the flipped sign when `beta_sign = -1`).
    pub fn apply_scaled_laplacian(&self, u: &[T], g: &[T]) -> Vec<T> {
        let mut au = self.a.mul_vec(u);
        for (v, &gk) in au.iter_mut().zip(g) {
            *v = gk - *v;
        }
        au
    }

    /// Values at boundary points: every correction's `w_C u_C + g_D`,
    /// averaged per point.
    pub fn reconstruct_boundary_values(
        &self,
        problem: &ProblemSpec<T>,
        ctx: &GridContext<T>,
        u: &[T],
        t: T,
    ) -> Vec<BoundaryValue<T>> {
        let nx = ctx.grid.nx;
        let mut sum = vec![(T::zero(), 0usize); ctx.grid.len()];
        for c in &self.corrections {
            let v = c.w_c * u[c.comp_index] + c.g_d(|x, y| problem.u_d(x, y, t));
            let e = &mut sum[c.bp.1 * nx + c.bp.0];
            e.0 += v;
            e.1 += 1;
        }
        ctx.class
            .boundary_points()
            .map(|(i, j)| {
                let (s, cnt) = sum[j * nx + i];
                if cnt > 0 {
                    BoundaryValue {
                        ij: (i, j),
                        value: s / T::of(cnt),
                        isolated: false,
                    }
                } else {
                    let p = ctx.grid.point(i, j);
                    let q = problem.geometry.closest_point(p).unwrap_or(p);
                    BoundaryValue {
                        ij: (i, j),
                        value: problem.u_d(q.x, q.y, t),
                        isolated: true,
                    }
                }
            })
            .collect()
    }

    /// Number of corrections per method.
    pub fn method_counts(&self) -> (usize, usize) {
        let line = self.corrections.iter().filter(|c| c.method == Method::Line).count();
        (line, self.corrections.len() - line)
    }
}

/// Reconstructed value at a boundary point. `isolated` points have no
/// computational neighbour; their value is the boundary datum at the closest
/// interface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValue<T> {
    pub ij: (usize, usize),
    pub value: T,
    pub isolated: bool,
}
