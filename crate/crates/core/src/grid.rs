//! Uniform Cartesian grid, inside/outside mask and point classification.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{EbError, Result};
use crate::geometry::{Axis, Geometry, Point};
use crate::Real;

/// `(x_i, y_j) = (x_lo + i h, y_lo + j h)`, `0 <= i < nx`, `0 <= j < ny`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub x_lo: T,
    pub y_lo: T,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(x_lo: T, y_lo: T, h: T, nx: usize, ny: usize) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(EbError::OutOfRange(format!("grid spacing must be positive, got {h}")));
        }
        if nx < 3 || ny < 3 {
            return Err(EbError::OutOfRange(format!("grid needs at least 3x3 points, got {nx}x{ny}")));
        }
        Ok(Self { x_lo, y_lo, h, nx, ny })
    }

    /// `(n+1) x (n+1)` points partitioning the square `[lo, hi]^2`.
    pub fn square(lo: T, hi: T, n: usize) -> Result<Self> {
        Self::new(lo, lo, (hi - lo) / T::of(n), n + 1, n + 1)
    }

    /// Smallest grid with spacing `h` anchored at the lower-left corner that
    /// covers `[x_lo, x_hi] x [y_lo, y_hi]`; the far edges are pushed out
    /// when the box is not a multiple of `h`.
    pub fn covering(x_lo: T, x_hi: T, y_lo: T, y_hi: T, h: T) -> Result<Self> {
        let cells = |len: T| {
            let r = len / h;
            let n = r.round();
            let n = if (r - n).abs() <= T::lit(1e-9) * r.max(T::one()) { n } else { r.ceil() };
            n.to_usize().unwrap_or(0)
        };
        Self::new(x_lo, y_lo, h, cells(x_hi - x_lo) + 1, cells(y_hi - y_lo) + 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x_lo + T::of(i) * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.y_lo + T::of(j) * self.h
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Point<T> {
        Point::new(self.x(i), self.y(j))
    }

    #[inline]
    pub fn linear(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of grid index `n` along `axis`.
    pub fn coord(&self, axis: Axis, n: usize) -> T {
        match axis {
            Axis::X => self.x(n),
            Axis::Y => self.y(n),
        }
    }

    /// Length of the grid box diagonal.
    pub fn diagonal(&self) -> T {
        (T::of(self.nx - 1) * self.h).hypot(T::of(self.ny - 1) * self.h)
    }
}

/// 0/1 grid function: 1 strictly inside the domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub nx: usize,
    pub ny: usize,
    pub m: Vec<u8>,
}

impl Mask {
    #[inline]
    pub fn inside(&self, i: usize, j: usize) -> bool {
        self.m[j * self.nx + i] == 1
    }

    /// Mask value at a possibly off-grid index; off-grid counts as outside.
    #[inline]
    pub fn inside_signed(&self, i: isize, j: isize) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.nx
            && (j as usize) < self.ny
            && self.inside(i as usize, j as usize)
    }

    pub fn count(&self) -> usize {
        self.m.iter().filter(|&&v| v == 1).count()
    }
}

/// Level-set values at every grid point, row-major (fast in x).
pub fn sample_level_set<T: Real>(grid: &Grid<T>, geom: &Geometry<T>) -> Vec<T> {
    (0..grid.len())
        .into_par_iter()
        .map(|n| geom.eval(grid.x(n % grid.nx), grid.y(n / grid.nx)))
        .collect()
}

/// `m_ij = 1` iff `psi(x_i, y_j) < 0`; `psi = 0` counts as outside.
pub fn build_mask<T: Real>(grid: &Grid<T>, geom: &Geometry<T>) -> Mask {
    mask_from_samples(grid, &sample_level_set(grid, geom))
}

pub fn mask_from_samples<T: Real>(grid: &Grid<T>, psi: &[T]) -> Mask {
    Mask {
        nx: grid.nx,
        ny: grid.ny,
        m: psi.iter().map(|&v| u8::from(v < T::zero())).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointTag {
    Exterior,
    /// Inside, with at least one 4-neighbour outside.
    Boundary,
    /// Inside, with all four neighbours inside.
    Computational,
}

impl PointTag {
    pub fn symbol(self) -> char {
        match self {
            PointTag::Exterior => '0',
            PointTag::Boundary => 'B',
            PointTag::Computational => 'C',
        }
    }
}

/// Point tags plus the unknown numbering of the computational points.
#[derive(Debug, Clone)]
pub struct Classification {
    pub nx: usize,
    pub ny: usize,
    tags: Vec<PointTag>,
    comp_index: Vec<Option<usize>>,
    /// `(i, j)` of each unknown, lexicographic (fast in x).
    comp_points: Vec<(usize, usize)>,
    /// `fast_y[k]`: position of unknown `k` in the fast-in-y ordering.
    fast_y: Vec<usize>,
}

impl Classification {
    pub fn tag(&self, i: usize, j: usize) -> PointTag {
        self.tags[j * self.nx + i]
    }

    pub fn tags(&self) -> &[PointTag] {
        &self.tags
    }

    /// Unknown index of `(i, j)` when it is a computational point.
    pub fn comp_index(&self, i: usize, j: usize) -> Option<usize> {
        self.comp_index[j * self.nx + i]
    }

    pub fn comp_points(&self) -> &[(usize, usize)] {
        &self.comp_points
    }

    pub fn n_comp(&self) -> usize {
        self.comp_points.len()
    }

    /// Permutation from fast-in-x to fast-in-y numbering.
    pub fn fast_y_permutation(&self) -> &[usize] {
        &self.fast_y
    }

    pub fn inverse_fast_y(&self) -> Vec<usize> {
        let mut inv = vec![0; self.fast_y.len()];
        for (k, &p) in self.fast_y.iter().enumerate() {
            inv[p] = k;
        }
        inv
    }

    pub fn count(&self, tag: PointTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }

    /// Boundary points, row-major.
    pub fn boundary_points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nx = self.nx;
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == PointTag::Boundary)
            .map(move |(n, _)| (n % nx, n / nx))
    }

    /// One line per grid row, top row first: `0` exterior, `B` boundary,
    /// `C` computational.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity((self.nx + 1) * self.ny);
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                s.push(self.tag(i, j).symbol());
            }
            s.push('\n');
        }
        s
    }
}

/// Tags every point and numbers the computational ones.
pub fn classify(mask: &Mask) -> Result<Classification> {
    let (nx, ny) = (mask.nx, mask.ny);
    let mut tags = vec![PointTag::Exterior; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            if !mask.inside(i, j) {
                continue;
            }
            if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                return Err(EbError::TouchesGridBoundary { i, j });
            }
            let sum = mask.m[j * nx + i + 1] as u32
                + mask.m[j * nx + i - 1] as u32
                + mask.m[(j + 1) * nx + i] as u32
                + mask.m[(j - 1) * nx + i] as u32;
            tags[j * nx + i] = if sum == 4 {
                PointTag::Computational
            } else {
                PointTag::Boundary
            };
        }
    }
    let mut comp_index = vec![None; nx * ny];
    let mut comp_points = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if tags[j * nx + i] == PointTag::Computational {
                comp_index[j * nx + i] = Some(comp_points.len());
                comp_points.push((i, j));
            }
        }
    }
    let mut fast_y = vec![0; comp_points.len()];
    let mut next = 0;
    for i in 0..nx {
        for j in 0..ny {
            if let Some(k) = comp_index[j * nx + i] {
                fast_y[k] = next;
                next += 1;
            }
        }
    }
    Ok(Classification {
        nx,
        ny,
        tags,
        comp_index,
        comp_points,
        fast_y,
    })
}

/// Maximal run of consecutive computational points along one grid line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub axis: Axis,
    /// `j` for x-lines, `i` for y-lines.
    pub line: usize,
    /// First index along the line.
    pub start: usize,
    pub len: usize,
}

impl Segment {
    /// Grid indices of the points in the segment.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.start..self.start + self.len).map(move |s| match self.axis {
            Axis::X => (s, self.line),
            Axis::Y => (self.line, s),
        })
    }

    pub fn first(&self) -> (usize, usize) {
        self.points().next().expect("segments are non-empty")
    }

    pub fn last(&self) -> (usize, usize) {
        let s = self.start + self.len - 1;
        match self.axis {
            Axis::X => (s, self.line),
            Axis::Y => (self.line, s),
        }
    }
}

pub fn extract_segments(class: &Classification, axis: Axis) -> Vec<Segment> {
    let (lines, along) = match axis {
        Axis::X => (class.ny, class.nx),
        Axis::Y => (class.nx, class.ny),
    };
    let is_comp = |line: usize, s: usize| {
        let (i, j) = match axis {
            Axis::X => (s, line),
            Axis::Y => (line, s),
        };
        class.tag(i, j) == PointTag::Computational
    };
    let mut out = Vec::new();
    for line in 0..lines {
        let mut s = 0;
        while s < along {
            if is_comp(line, s) {
                let start = s;
                while s < along && is_comp(line, s) {
                    s += 1;
                }
                out.push(Segment {
                    axis,
                    line,
                    start,
                    len: s - start,
                });
            } else {
                s += 1;
            }
        }
    }
    out
}

/// Grid, level-set samples, mask and classification for one geometry.
#[derive(Debug, Clone)]
pub struct GridContext<T: Real> {
    pub grid: Grid<T>,
    pub psi: Vec<T>,
    pub mask: Mask,
    pub class: Classification,
}

impl<T: Real> GridContext<T> {
    pub fn new(grid: Grid<T>, geom: &Geometry<T>) -> Result<Self> {
        let psi = sample_level_set(&grid, geom);
        let mask = mask_from_samples(&grid, &psi);
        let class = classify(&mask)?;
        Ok(Self {
            grid,
            psi,
            mask,
            class,
        })
    }

    #[inline]
    pub fn psi_at(&self, i: usize, j: usize) -> T {
        self.psi[self.grid.linear(i, j)]
    }

    pub fn n_comp(&self) -> usize {
        self.class.n_comp()
    }

    /// Human-readable summary followed by the ASCII classification map.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# grid {}x{} h={} exterior={} boundary={} computational={}",
            self.grid.nx,
            self.grid.ny,
            self.grid.h,
            self.class.count(PointTag::Exterior),
            self.class.count(PointTag::Boundary),
            self.class.count(PointTag::Computational)
        );
        s.push_str(&self.class.to_ascii());
        s
    }
}
