//! Single-grid solves and the sweeps built from them.

use std::time::Instant;

use ebm_core::assembly::{assemble, AssemblyOptions, OperatorSystem};
use ebm_core::interpolation::Strategy;
use ebm_core::linalg::{
    cg_solve, extremal_eigs, minres_solve, AmgHierarchy, AmgParams, Cycle, SolverOptions, Which,
};
use ebm_core::spd::{check_operator, OperatorCertificate, Verdict};
use ebm_core::timestepping::{uniform_steps, CrankNicolson, ThetaScheme};
use ebm_core::{EbError, GridContext};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::norms::{gradient_error, rate, solution_error, GridFunction, Norms};
use crate::problems::{self, NamedProblem};

/// Discretization and solver choices shared by all runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub strategy: Strategy,
    pub cycle: Cycle,
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            strategy: Strategy::Mixed,
            cycle: Cycle::W,
            tol: 1e-12,
        }
    }
}

impl Settings {
    pub fn new(strategy: Strategy, cycle: Cycle) -> Self {
        Self {
            strategy,
            cycle,
            ..Self::default()
        }
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            strategy: cfg.strategy()?,
            cycle: cfg.cycle()?,
            tol: cfg.tol,
        })
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    #[serde(rename = "E_l2")]
    pub e_l2: Option<f64>,
    #[serde(rename = "E_linf")]
    pub e_linf: Option<f64>,
    pub rate_l2: Option<f64>,
    pub rate_linf: Option<f64>,
    pub grad_l2: Option<f64>,
    pub grad_linf: Option<f64>,
    /// Iterations of the solve, or the mean per step for time-dependent runs.
    pub iters: Option<f64>,
    pub certified: String,
    pub t_setup_s: f64,
    pub t_solve_s: f64,
}

impl ResultRow {
    fn failed(n: usize, h: f64) -> Self {
        Self {
            n,
            h,
            e_l2: None,
            e_linf: None,
            rate_l2: None,
            rate_linf: None,
            grad_l2: None,
            grad_linf: None,
            iters: None,
            certified: "error".into(),
            t_setup_s: 0.0,
            t_solve_s: 0.0,
        }
    }
}

/// Fills `rate_l2` and `rate_linf` from consecutive rows.
pub fn fill_rates(rows: &mut [ResultRow]) {
    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        let r = |a: Option<f64>, b: Option<f64>| Some(rate((prev.h, a?), (cur.h, b?))).flatten();
        let (l2, linf) = (r(prev.e_l2, cur.e_l2), r(prev.e_linf, cur.e_linf));
        rows[k].rate_l2 = l2;
        rows[k].rate_linf = linf;
    }
}

/// Rates of an arbitrary column between consecutive rows.
pub fn column_rates(rows: &[ResultRow], column: impl Fn(&ResultRow) -> Option<f64>) -> Vec<Option<f64>> {
    rows.windows(2)
        .map(|w| Some(rate((w[0].h, column(&w[0])?), (w[1].h, column(&w[1])?))).flatten())
        .collect()
}

/// Everything produced by one stationary solve.
pub struct StationaryRun {
    pub n: usize,
    pub ctx: GridContext<f64>,
    pub sys: OperatorSystem<f64>,
    pub certificate: OperatorCertificate<f64>,
    pub u: Vec<f64>,
    pub solution: GridFunction,
    pub iterations: usize,
    pub residual: f64,
    pub t_setup: f64,
    pub t_solve: f64,
    pub error: Option<Norms>,
    pub grad_error: Option<Norms>,
}

impl StationaryRun {
    pub fn row(&self) -> ResultRow {
        ResultRow {
            n: self.n,
            h: self.sys.h,
            e_l2: self.error.map(|e| e.l2),
            e_linf: self.error.map(|e| e.linf),
            rate_l2: None,
            rate_linf: None,
            grad_l2: self.grad_error.map(|e| e.l2),
            grad_linf: self.grad_error.map(|e| e.linf),
            iters: Some(self.iterations as f64),
            certified: self.certificate.verdict.to_string(),
            t_setup_s: self.t_setup,
            t_solve_s: self.t_solve,
        }
    }
}

/// Grid, classification and assembled operator for `problem` at `N`.
pub fn discretize(
    problem: &NamedProblem,
    n: usize,
    strategy: Strategy,
) -> Result<(GridContext<f64>, OperatorSystem<f64>)> {
    let grid = problem.domain.grid(n)?;
    let ctx = GridContext::new(grid, &problem.spec.geometry)?;
    let sys = assemble(&problem.spec, &ctx, AssemblyOptions::with_strategy(strategy))?;
    Ok((ctx, sys))
}

/// Assemble, certify, AMG-CG solve, reconstruct and measure.
pub fn solve_stationary(problem: &NamedProblem, n: usize, settings: Settings) -> Result<StationaryRun> {
    let start = Instant::now();
    let (ctx, sys) = discretize(problem, n, settings.strategy)?;
    let certificate = check_operator(&sys);
    let amg = AmgHierarchy::setup(&sys.a, settings.cycle, AmgParams::default())?;
    let t_setup = start.elapsed().as_secs_f64();
    let opts = SolverOptions::capped(settings.tol, sys.dim(), 10.0);
    let sol = cg_solve(sys.a.csr(), &sys.rhs, None, Some(&amg), opts)?;
    let solution = GridFunction::assemble(&sys, &problem.spec, &ctx, &sol.x, 0.0);
    let error = problem
        .exact
        .as_ref()
        .map(|u| solution_error(&solution, &ctx, |x, y| u(x, y, 0.0)));
    let grad_error = problem
        .gradient
        .as_ref()
        .map(|g| gradient_error(&solution, &ctx, |x, y| g(x, y, 0.0)));
    Ok(StationaryRun {
        n,
        certificate,
        iterations: sol.iterations,
        residual: sol.residual_history.last().copied().unwrap_or(0.0),
        t_setup,
        t_solve: sol.solve_seconds,
        u: sol.x,
        solution,
        error,
        grad_error,
        ctx,
        sys,
    })
}

/// A sweep's table plus the failures that did not stop it.
#[derive(Debug, Clone)]
pub struct Sweep<R> {
    pub rows: Vec<R>,
    pub failures: Vec<(usize, HarnessErrorInfo)>,
}

impl<R> Default for Sweep<R> {
    fn default() -> Self {
        Self {
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }
}

/// Failure summary kept per N (errors themselves are not `Clone`).
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessErrorInfo {
    pub message: String,
    pub exit_code: i32,
}

impl From<&HarnessError> for HarnessErrorInfo {
    fn from(e: &HarnessError) -> Self {
        Self {
            message: e.to_string(),
            exit_code: e.exit_code(),
        }
    }
}

/// Poisson convergence sweep over `cfg.n`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Sweep<ResultRow>> {
    let problem = problems::named(&cfg.problem)?;
    let settings = Settings::from_config(cfg)?;
    convergence(&problem, &cfg.n, settings)
}

pub fn convergence(problem: &NamedProblem, ns: &[usize], settings: Settings) -> Result<Sweep<ResultRow>> {
    let mut sweep = Sweep::default();
    for &n in ns {
        match solve_stationary(problem, n, settings) {
            Ok(run) => sweep.rows.push(run.row()),
            Err(e) => {
                log::error!("{} N={n}: {e}", problem.name);
                sweep.failures.push((n, (&e).into()));
                let h = (problem.domain.x_hi - problem.domain.x_lo) / n as f64;
                sweep.rows.push(ResultRow::failed(n, h));
            }
        }
    }
    fill_rates(&mut sweep.rows);
    Ok(sweep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    /// Largest-magnitude eigenvalue of `h^2 L` (divided by `|beta|` when constant).
    pub lambda_large: f64,
    pub lambda_small: f64,
}

/// Extremal eigenvalues in the sign convention of `h^2 div(beta grad)`.
pub fn spectrum(problem: &NamedProblem, n: usize, settings: Settings, tol: f64) -> Result<EigRow> {
    let (_, sys) = discretize(problem, n, settings.strategy)?;
    let scale = sys.beta_const.map_or(1.0, f64::abs);
    let max = extremal_eigs(sys.a.csr(), Which::Max, tol, None)?;
    let amg = AmgHierarchy::setup(&sys.a, settings.cycle, AmgParams::default())?;
    let min = extremal_eigs(sys.a.csr(), Which::Min, tol, Some(&amg))?;
    Ok(EigRow {
        n,
        h: sys.h,
        lambda_large: -max / scale,
        lambda_small: -min / scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpdRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    pub verdict: String,
    pub diag_dominant: bool,
    pub non_dominant_rows: usize,
    pub segments: usize,
    pub failing_segments: usize,
    pub worst_margin: f64,
    pub line_corrections: usize,
    pub rbf_corrections: usize,
}

pub fn spd_check(problem: &NamedProblem, n: usize, strategy: Strategy) -> Result<(SpdRow, OperatorCertificate<f64>)> {
    let (_, sys) = discretize(problem, n, strategy)?;
    let cert = check_operator(&sys);
    let (line, rbf) = sys.method_counts();
    let row = SpdRow {
        n,
        h: sys.h,
        verdict: cert.verdict.to_string(),
        diag_dominant: cert.dominance.dominant,
        non_dominant_rows: cert.dominance.failing_rows,
        segments: cert.x_segments + cert.y_segments,
        failing_segments: cert.failing.len(),
        worst_margin: cert.dominance.worst_margin,
        line_corrections: line,
        rbf_corrections: rbf,
    };
    Ok((row, cert))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HelmholtzRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    pub iters: usize,
    pub residual: f64,
    pub u_linf: f64,
    pub t_setup_s: f64,
    pub t_solve_s: f64,
}

/// Star-shaped Helmholtz problem solved with MINRES, preconditioned by AMG
/// on the (positive definite) unshifted operator.
pub fn helmholtz(n: usize, settings: Settings) -> Result<(HelmholtzRow, GridFunction)> {
    let start = Instant::now();
    let probe = problems::star();
    let h = (probe.domain.x_hi - probe.domain.x_lo) / n as f64;
    let problem = problems::star_with_h(h);
    let (ctx, sys) = discretize(&problem, n, settings.strategy)?;
    let omega = problems::HELMHOLTZ_OMEGA;
    let shifted = sys.a.shifted(-omega * omega * h * h);
    let amg = AmgHierarchy::setup(&sys.a, settings.cycle, AmgParams::default())?;
    let t_setup = start.elapsed().as_secs_f64();
    let opts = SolverOptions::capped(settings.tol, sys.dim(), 20.0);
    let sol = minres_solve(shifted.csr(), &sys.rhs, None, Some(&amg), opts)?;
    let gf = GridFunction::assemble(&sys, &problem.spec, &ctx, &sol.x, 0.0);
    let u_linf = gf.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let row = HelmholtzRow {
        n,
        h,
        iters: sol.iterations,
        residual: sol.residual_history.last().copied().unwrap_or(0.0),
        u_linf,
        t_setup_s: t_setup,
        t_solve_s: sol.solve_seconds,
    };
    Ok((row, gf))
}

/// Final-time errors of a time-dependent run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeRun {
    pub row: ResultRow,
    pub steps: usize,
    pub dt: f64,
    pub iterations: Vec<usize>,
    /// `max |u|` over the unknowns at the first and the final level.
    pub initial_max: f64,
    pub final_max: f64,
}

/// Heat equation with Crank-Nicolson, `dt = cfl h` rounded so the steps
/// land on `t_end`.
pub fn heat(problem: &NamedProblem, n: usize, cfl: f64, t_end: f64, settings: Settings) -> Result<TimeRun> {
    let exact = problem
        .exact
        .clone()
        .ok_or_else(|| HarnessError::Config(format!("{} has no exact solution", problem.name)))?;
    let start = Instant::now();
    let (ctx, sys) = discretize(problem, n, settings.strategy)?;
    if sys.beta_sign < 0.0 {
        return Err(HarnessError::Config("the heat equation needs beta > 0".into()));
    }
    let spec = &problem.spec;
    let (steps, dt) = uniform_steps(t_end, cfl * sys.h);
    let u0: Vec<f64> = sys.points.iter().map(|p| exact(p.x, p.y, 0.0)).collect();
    let initial_max = max_abs(&u0);
    let mut cn = CrankNicolson::new(
        &sys.a,
        sys.h,
        dt,
        u0,
        sys.boundary_rhs(spec, 0.0),
        sys.source_values(spec, 0.0),
        settings.cycle,
    )?
    .with_tolerance(settings.tol);
    let t_setup = start.elapsed().as_secs_f64();
    let start = Instant::now();
    for k in 1..=steps {
        let t = k as f64 * dt;
        cn.step(&sys.boundary_rhs(spec, t), &sys.source_values(spec, t))?;
    }
    let t_solve = start.elapsed().as_secs_f64();
    let gf = GridFunction::assemble(&sys, spec, &ctx, cn.current(), t_end);
    let error = solution_error(&gf, &ctx, |x, y| exact(x, y, t_end));
    let grad = problem
        .gradient
        .as_ref()
        .map(|g| gradient_error(&gf, &ctx, |x, y| g(x, y, t_end)));
    let certified = check_operator(&sys).verdict;
    Ok(TimeRun {
        row: time_row(n, sys.h, error, grad, Some(cn.mean_iterations()), certified, t_setup, t_solve),
        steps,
        dt,
        iterations: cn.iterations().to_vec(),
        initial_max,
        final_max: max_abs(cn.current()),
    })
}

/// Wave equation with the θ-scheme, started from the exact solution at the
/// first two levels.
pub fn wave(
    problem: &NamedProblem,
    n: usize,
    theta: f64,
    cfl: f64,
    t_end: f64,
    settings: Settings,
) -> Result<TimeRun> {
    let exact = problem
        .exact
        .clone()
        .ok_or_else(|| HarnessError::Config(format!("{} has no exact solution", problem.name)))?;
    let start = Instant::now();
    let (ctx, sys) = discretize(problem, n, settings.strategy)?;
    if sys.beta_sign < 0.0 {
        return Err(HarnessError::Config("the wave equation needs beta > 0".into()));
    }
    let spec = &problem.spec;
    let (steps, dt) = uniform_steps(t_end, cfl * sys.h);
    let sample = |t: f64| sys.points.iter().map(|p| exact(p.x, p.y, t)).collect::<Vec<_>>();
    let initial_max = max_abs(&sample(0.0));
    let mut scheme = ThetaScheme::new(
        &sys.a,
        sys.h,
        theta,
        dt,
        (sample(0.0), sample(dt)),
        (sys.boundary_rhs(spec, 0.0), sys.boundary_rhs(spec, dt)),
        settings.cycle,
    )?
    .with_tolerance(settings.tol);
    let t_setup = start.elapsed().as_secs_f64();
    let start = Instant::now();
    for k in 2..=steps {
        scheme.step(&sys.boundary_rhs(spec, k as f64 * dt))?;
    }
    let t_solve = start.elapsed().as_secs_f64();
    let t = steps as f64 * dt;
    let gf = GridFunction::assemble(&sys, spec, &ctx, scheme.current(), t);
    let error = solution_error(&gf, &ctx, |x, y| exact(x, y, t));
    let iters = (theta > 0.0).then(|| scheme.mean_iterations());
    let certified = check_operator(&sys).verdict;
    Ok(TimeRun {
        row: time_row(n, sys.h, error, None, iters, certified, t_setup, t_solve),
        steps,
        dt,
        iterations: scheme.iterations().to_vec(),
        initial_max,
        final_max: max_abs(scheme.current()),
    })
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[allow(clippy::too_many_arguments)]
fn time_row(
    n: usize,
    h: f64,
    error: Norms,
    grad: Option<Norms>,
    iters: Option<f64>,
    certified: Verdict,
    t_setup: f64,
    t_solve: f64,
) -> ResultRow {
    ResultRow {
        n,
        h,
        e_l2: Some(error.l2),
        e_linf: Some(error.linf),
        rate_l2: None,
        rate_linf: None,
        grad_l2: grad.map(|g| g.l2),
        grad_linf: grad.map(|g| g.linf),
        iters,
        certified: certified.to_string(),
        t_setup_s: t_setup,
        t_solve_s: t_solve,
    }
}

/// Time-dependent sweep; each N failing independently.
pub fn time_sweep(
    ns: &[usize],
    mut run: impl FnMut(usize) -> Result<TimeRun>,
    domain_width: f64,
) -> Sweep<ResultRow> {
    let mut sweep = Sweep::default();
    for &n in ns {
        match run(n) {
            Ok(r) => sweep.rows.push(r.row),
            Err(e) => {
                log::error!("N={n}: {e}");
                sweep.failures.push((n, (&e).into()));
                sweep.rows.push(ResultRow::failed(n, domain_width / n as f64));
            }
        }
    }
    fill_rates(&mut sweep.rows);
    sweep
}

/// Whether a solver error is an indefiniteness breakdown.
pub fn is_breakdown(e: &HarnessError) -> bool {
    matches!(e, HarnessError::Core(EbError::Indefinite { .. }))
}
