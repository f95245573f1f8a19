//! The benchmark problems, bound to their exact solutions.

use std::sync::Arc;

use ebm_core::geometry::shapes;
use ebm_core::timestepping::{standing_mode, KAPPA_77};
use ebm_core::{Coefficient, Equation, Geometry, Grid, ProblemSpec};

use crate::error::{HarnessError, Result};

pub type ScalarField = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(f64, f64, f64) -> (f64, f64) + Send + Sync>;

/// Computational box `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Domain {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self {
            x_lo: lo,
            x_hi: hi,
            y_lo: lo,
            y_hi: hi,
        }
    }

    /// `(N+1) x (N+1)` points when the box is square.
    pub fn grid(&self, n: usize) -> Result<Grid<f64>> {
        let h = (self.x_hi - self.x_lo) / n as f64;
        Ok(Grid::covering(self.x_lo, self.x_hi, self.y_lo, self.y_hi, h)?)
    }
}

#[derive(Clone)]
pub struct NamedProblem {
    pub name: String,
    pub spec: ProblemSpec<f64>,
    pub domain: Domain,
    pub exact: Option<ScalarField>,
    pub gradient: Option<VectorField>,
}

impl std::fmt::Debug for NamedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NamedProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// Point source of the star Helmholtz problem.
pub const HELMHOLTZ_SOURCE: (f64, f64) = (-0.375, 0.125);
pub const HELMHOLTZ_OMEGA: f64 = 50.0;
pub const HELMHOLTZ_STRENGTH: f64 = 1000.0;

/// Names accepted by [`named`].
pub const NAMES: &[&str] = &[
    "glass",
    "tilted_square",
    "bone",
    "star",
    "heat_disk",
    "wave_disk",
    "disk",
    "ellipse_fixed_area(a)",
    "rotated_ellipse(alpha)",
];

/// Looks up a problem by name; parameterized families take their parameter
/// in parentheses.
pub fn named(name: &str) -> Result<NamedProblem> {
    let name = name.trim();
    let (head, param) = split_param(name)?;
    let needs = |p: Option<f64>| p.ok_or_else(|| HarnessError::Config(format!("`{head}` needs a parameter")));
    let problem = match head {
        "glass" => glass(),
        "tilted_square" => tilted_square(),
        "bone" => bone(),
        "star" => star(),
        "heat_disk" => heat_disk(),
        "wave_disk" => wave_disk(),
        "disk" => disk(),
        "ellipse_fixed_area" | "ellipse" => ellipse_fixed_area(needs(param)?),
        "rotated_ellipse" => rotated_ellipse(needs(param)?),
        _ => {
            return Err(HarnessError::Config(format!(
                "unknown problem `{name}` (known: {})",
                NAMES.join(", ")
            )))
        }
    };
    Ok(NamedProblem {
        name: name.to_string(),
        ..problem
    })
}

fn split_param(name: &str) -> Result<(&str, Option<f64>)> {
    match name.find('(') {
        None => Ok((name, None)),
        Some(open) => {
            let inner = name[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| HarnessError::Config(format!("malformed problem `{name}`")))?;
            let v = inner
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad parameter in `{name}`")))?;
            Ok((&name[..open], Some(v)))
        }
    }
}

fn stationary(
    name: &str,
    geometry: Geometry<f64>,
    beta: Coefficient<f64>,
    f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    u: impl Fn(f64, f64) -> f64 + Send + Sync + Clone + 'static,
    grad: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    domain: Domain,
) -> NamedProblem {
    let exact = u.clone();
    NamedProblem {
        name: name.to_string(),
        spec: ProblemSpec::poisson(geometry, beta, f, u),
        domain,
        exact: Some(Arc::new(move |x, y, _| exact(x, y))),
        gradient: Some(Arc::new(move |x, y, _| grad(x, y))),
    }
}

pub fn glass() -> NamedProblem {
    const K: f64 = 20.0;
    const CENTERS: [(f64, f64); 2] = [(0.25, 0.5), (0.75, 0.5)];
    let bumps = |x: f64, y: f64| {
        CENTERS.map(|(a, b)| {
            let (dx, dy) = (x - a, y - b);
            (dx, dy, (-K * (dx * dx + dy * dy)).exp())
        })
    };
    let lap = move |x: f64, y: f64| -> f64 {
        bumps(x, y)
            .iter()
            .map(|&(dx, dy, g)| -(4.0 * K * K * (dx * dx + dy * dy) - 4.0 * K) * g)
            .sum()
    };
    let grad = move |x: f64, y: f64| {
        bumps(x, y)
            .iter()
            .fold((0.0, 0.0), |(gx, gy), &(dx, dy, g)| (gx + 2.0 * K * dx * g, gy + 2.0 * K * dy * g))
    };
    stationary(
        "glass",
        shapes::glass(),
        Coefficient::Constant(-8.0),
        move |x, y| -8.0 * lap(x, y),
        shapes::glass_psi,
        grad,
        Domain::square(0.0, 1.0),
    )
}

pub fn tilted_square() -> NamedProblem {
    let u = |x: f64, y: f64| (-x * x - y * y).exp();
    stationary(
        "tilted_square",
        shapes::tilted_square(),
        Coefficient::Constant(1.0),
        move |x, y| (4.0 * (x * x + y * y) - 4.0) * u(x, y),
        u,
        move |x, y| (-2.0 * x * u(x, y), -2.0 * y * u(x, y)),
        Domain::square(-3.0, 3.0),
    )
}

pub fn bone() -> NamedProblem {
    let ux = |x: f64, y: f64| x.exp() * (x * x * y.sin() + 2.0 * x * y.sin() + y * y);
    let uy = |x: f64, y: f64| x.exp() * (x * x * y.cos() + 2.0 * y);
    stationary(
        "bone",
        shapes::bone(shapes::DEFAULT_N_GUESS),
        Coefficient::variable(|x: f64, y: f64| 2.0 + (x * y).sin()),
        move |x, y| {
            let beta = 2.0 + (x * y).sin();
            let lap = x.exp() * (4.0 * x * y.sin() + 2.0 * y.sin() + y * y + 2.0);
            beta * lap + (x * y).cos() * (y * ux(x, y) + x * uy(x, y))
        },
        |x: f64, y: f64| x.exp() * (x * x * y.sin() + y * y),
        move |x, y| (ux(x, y), uy(x, y)),
        Domain {
            x_lo: -2.0,
            x_hi: 2.0,
            y_lo: -1.0,
            y_hi: 3.0,
        },
    )
}

/// Bilinear hat of support `2h x 2h` centred at `(xs, ys)`, scaled so that
/// its grid sum times `h^2` is one.
pub fn hat(xs: f64, ys: f64, h: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync + Clone {
    move |x, y| {
        let wx = (1.0 - (x - xs).abs() / h).max(0.0);
        let wy = (1.0 - (y - ys).abs() / h).max(0.0);
        wx * wy / (h * h)
    }
}

/// `omega^2 u + Lap u = 1000 delta`; the source depends on `h` and is filled
/// in by [`star_with_h`].
pub fn star() -> NamedProblem {
    star_with_h(f64::NAN)
}

pub fn star_with_h(h: f64) -> NamedProblem {
    let (xs, ys) = HELMHOLTZ_SOURCE;
    let delta = hat(xs, ys, h);
    NamedProblem {
        name: "star".into(),
        spec: ProblemSpec::new(
            shapes::star(shapes::DEFAULT_N_GUESS),
            Coefficient::Constant(1.0),
            move |x, y, _| HELMHOLTZ_STRENGTH * delta(x, y),
            |_, _, _| 0.0,
            Equation::Helmholtz {
                omega: HELMHOLTZ_OMEGA,
            },
        ),
        domain: Domain::square(-1.0, 1.0),
        exact: None,
        gradient: None,
    }
}

pub fn heat_disk() -> NamedProblem {
    let u = |x: f64, y: f64, t: f64| (-t).exp() * (x * x + y * y - 0.25);
    NamedProblem {
        name: "heat_disk".into(),
        spec: ProblemSpec::new(
            Geometry::level_set(|x: f64, y: f64| x * x + y * y - 0.25),
            Coefficient::variable(|x, y| 0.25 - x * x - y * y),
            |x, y, t: f64| (-t).exp() * (7.0 * (x * x + y * y) - 0.75),
            u,
            Equation::Heat,
        ),
        domain: Domain::square(-1.0, 1.0),
        exact: Some(Arc::new(u)),
        gradient: Some(Arc::new(|x, y, t: f64| (2.0 * x * (-t).exp(), 2.0 * y * (-t).exp()))),
    }
}

/// Temporal period of [`wave_disk`].
pub fn wave_period() -> f64 {
    2.0 * std::f64::consts::PI / KAPPA_77
}

/// Standing mode `m = n = 7` in the unit disk.
pub fn wave_disk() -> NamedProblem {
    let u = |x: f64, y: f64, t: f64| {
        let r = x.hypot(y).min(1.0);
        standing_mode(r, y.atan2(x), t, 7, KAPPA_77).unwrap_or(f64::NAN)
    };
    NamedProblem {
        name: "wave_disk".into(),
        spec: ProblemSpec::new(
            shapes::disk(1.0),
            Coefficient::Constant(1.0),
            |_, _, _| 0.0,
            |_, _, _| 0.0,
            Equation::Wave,
        ),
        domain: Domain::square(-1.1, 1.1),
        exact: Some(Arc::new(u)),
        gradient: None,
    }
}

/// Unit disk with `Lap u = 3`, `u = 3 (r^2 - 1) / 4`.
pub fn disk() -> NamedProblem {
    stationary(
        "disk",
        shapes::disk(1.0),
        Coefficient::Constant(1.0),
        |_, _| 3.0,
        |x: f64, y: f64| 0.75 * (x * x + y * y - 1.0),
        |x, y| (1.5 * x, 1.5 * y),
        Domain::square(-1.5, 1.5),
    )
}

/// `x^2/a^2 + a^2 y^2 < 1` with `Lap u = 3` and zero boundary data.
pub fn ellipse_fixed_area(a: f64) -> NamedProblem {
    let (p, q) = (1.0 / (a * a), a * a);
    let c = 3.0 / (2.0 * (p + q));
    stationary(
        "ellipse_fixed_area",
        shapes::ellipse_fixed_area(a),
        Coefficient::Constant(1.0),
        |_, _| 3.0,
        move |x, y| c * (p * x * x + q * y * y - 1.0),
        move |x, y| (2.0 * c * p * x, 2.0 * c * q * y),
        Domain::square(-2.5, 2.5),
    )
}

/// Ellipse with semi-axes 4 and 2 rotated by `alpha`; `Lap u = 3`, zero data.
pub fn rotated_ellipse(alpha: f64) -> NamedProblem {
    let geometry = shapes::rotated_ellipse(alpha);
    let g = geometry.clone();
    // psi = X^2/16 + Y^2/4 - 1 has Laplacian 5/8
    let c = 3.0 / 0.625;
    stationary(
        "rotated_ellipse",
        geometry,
        Coefficient::Constant(1.0),
        |_, _| 3.0,
        move |x, y| c * g.eval(x, y),
        move |x, y| {
            let (cs, sn) = (alpha.cos(), alpha.sin());
            let (xr, yr) = (x * cs - y * sn, x * sn + y * cs);
            let (dx, dy) = (xr / 8.0, yr / 2.0);
            (c * (dx * cs + dy * sn), c * (-dx * sn + dy * cs))
        },
        Domain::square(-5.0, 5.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_fd(u: &ScalarField, beta: &Coefficient<f64>, x: f64, y: f64) -> f64 {
        let h = 1e-4;
        let flux = |xa: f64, ya: f64, xb: f64, yb: f64| {
            beta.eval((xa + xb) / 2.0, (ya + yb) / 2.0) * (u(xb, yb, 0.0) - u(xa, ya, 0.0))
        };
        (flux(x, y, x + h, y) - flux(x - h, y, x, y) + flux(x, y, x, y + h) - flux(x, y - h, x, y)) / (h * h)
    }

    #[test]
    fn sources_match_exact_solutions() {
        let cases = [
            (glass(), (0.3, 0.45)),
            (tilted_square(), (0.5, 0.2)),
            (bone(), (0.1, 1.4)),
            (disk(), (0.2, -0.3)),
            (ellipse_fixed_area(1.7), (0.3, 0.1)),
            (rotated_ellipse(0.7), (1.0, -0.5)),
        ];
        for (p, (x, y)) in cases {
            let u = p.exact.clone().unwrap();
            let fd = laplacian_fd(&u, &p.spec.beta, x, y);
            let f = p.spec.f(x, y, 0.0);
            assert!((fd - f).abs() < 1e-4 * f.abs().max(1.0), "{}: {fd} vs {f}", p.name);
        }
    }

    #[test]
    fn gradients_match_exact_solutions() {
        for (p, (x, y)) in [
            (glass(), (0.3, 0.45)),
            (tilted_square(), (0.5, 0.2)),
            (bone(), (0.1, 1.4)),
            (ellipse_fixed_area(0.6), (0.3, 0.1)),
            (rotated_ellipse(2.1), (1.0, -0.5)),
            (heat_disk(), (0.1, 0.2)),
        ] {
            let u = p.exact.clone().unwrap();
            let g = p.gradient.clone().unwrap()(x, y, 0.0);
            let e = 1e-6;
            let gx = (u(x + e, y, 0.0) - u(x - e, y, 0.0)) / (2.0 * e);
            let gy = (u(x, y + e, 0.0) - u(x, y - e, 0.0)) / (2.0 * e);
            assert!((g.0 - gx).abs() < 1e-6 && (g.1 - gy).abs() < 1e-6, "{}", p.name);
        }
    }

    #[test]
    fn heat_source_is_consistent() {
        let p = heat_disk();
        let u = p.exact.clone().unwrap();
        let (x, y, t) = (0.2, -0.1, 0.3);
        let e = 1e-5;
        let ut = (u(x, y, t + e) - u(x, y, t - e)) / (2.0 * e);
        let h = 1e-4;
        let beta = |x: f64, y: f64| p.spec.beta.eval(x, y);
        let lu = (beta(x + h / 2.0, y) * (u(x + h, y, t) - u(x, y, t)) - beta(x - h / 2.0, y) * (u(x, y, t) - u(x - h, y, t))
            + beta(x, y + h / 2.0) * (u(x, y + h, t) - u(x, y, t))
            - beta(x, y - h / 2.0) * (u(x, y, t) - u(x, y - h, t)))
            / (h * h);
        assert!((ut - lu - p.spec.f(x, y, t)).abs() < 1e-5);
    }

    #[test]
    fn hat_sums_to_one_on_any_grid() {
        let h = 0.013;
        let delta = hat(-0.375, 0.125, h);
        let mut s = 0.0;
        for i in -100..100 {
            for j in -100..100 {
                s += delta(i as f64 * h, j as f64 * h) * h * h;
            }
        }
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wave_mode_vanishes_on_the_circle() {
        let u = wave_disk().exact.unwrap();
        assert!(u(0.6, 0.8, 0.37).abs() < 1e-8);
    }

    #[test]
    fn names() {
        assert!(named("glass").is_ok());
        assert!(named("rotated_ellipse(0.5)").is_ok());
        assert!(named("ellipse_fixed_area").is_err());
        assert!(named("teapot").is_err());
    }
}
