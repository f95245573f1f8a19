//! Subcommand execution shared by the binary and the tests.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{self, strip_timings, summary, write_csv};
use crate::problems;
use crate::qoi::{qoi_sweep, Family};
use crate::runs::{self, time_sweep, ResultRow, Settings, Sweep};

/// Relative Ritz residual for the eigenvalue report.
pub const EIG_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Poisson,
    Heat,
    Wave,
    Helmholtz,
    Qoi,
    SpdCheck,
    Eig,
}

impl Command {
    fn stem(self) -> &'static str {
        match self {
            Command::Poisson => "poisson",
            Command::Heat => "heat",
            Command::Wave => "wave",
            Command::Helmholtz => "helmholtz",
            Command::Qoi => "qoi",
            Command::SpdCheck => "spdcheck",
            Command::Eig => "eig",
        }
    }
}

/// Runs `cmd`, writes its CSV under the output directory and returns the
/// text to print. Per-N failures do not stop a sweep; the first one is
/// returned as the error after everything has been written.
pub fn execute(cmd: Command, cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let dir = cfg.output_dir();
    let settings = Settings::from_config(cfg)?;
    let stem = format!("{}_{}", cmd.stem(), sanitize(&cfg.problem));
    match cmd {
        Command::Poisson => {
            let problem = problems::named(&cfg.problem)?;
            dump_debug(cfg, &dir, &stem)?;
            let sweep = runs::convergence(&problem, &cfg.n, settings)?;
            finish_table(cfg, &dir, &stem, sweep)
        }
        Command::Heat => {
            let problem = problems::named(&cfg.problem)?;
            let width = problem.domain.x_hi - problem.domain.x_lo;
            let sweep = time_sweep(
                &cfg.n,
                |n| runs::heat(&problem, n, cfg.time.cfl, cfg.time.t_end, settings),
                width,
            );
            finish_table(cfg, &dir, &stem, sweep)
        }
        Command::Wave => {
            let problem = problems::named(&cfg.problem)?;
            let width = problem.domain.x_hi - problem.domain.x_lo;
            let t_end = match cfg.time.periods {
                Some(p) => p * problems::wave_period(),
                None => cfg.time.t_end,
            };
            let sweep = time_sweep(
                &cfg.n,
                |n| runs::wave(&problem, n, cfg.time.theta, cfg.time.cfl, t_end, settings),
                width,
            );
            finish_table(cfg, &dir, &stem, sweep)
        }
        Command::Helmholtz => {
            let mut rows = Vec::new();
            let mut first_err = None;
            for &n in &cfg.n {
                match runs::helmholtz(n, settings) {
                    Ok((mut row, _)) => {
                        if cfg.deterministic {
                            row.t_setup_s = 0.0;
                            row.t_solve_s = 0.0;
                        }
                        rows.push(row)
                    }
                    Err(e) => {
                        log::error!("helmholtz N={n}: {e}");
                        first_err.get_or_insert(e);
                    }
                }
            }
            let path = write_csv(&dir, "helmholtz.csv", &rows)?;
            let mut text = format!("{:>6} {:>6} {:>10} {:>12}\n", "N", "iters", "residual", "|u|_inf");
            for r in &rows {
                text += &format!("{:>6} {:>6} {:>10.2e} {:>12.5e}\n", r.n, r.iters, r.residual, r.u_linf);
            }
            text += &format!("wrote {}\n", path.display());
            first_err.map_or(Ok(text), Err)
        }
        Command::Qoi => {
            let family: Family = cfg.qoi.family.parse()?;
            let n = cfg.n[0];
            let rows = qoi_sweep(family, cfg.qoi.samples, n, settings);
            let path = write_csv(&dir, &format!("qoi_{}_N{n}.csv", cfg.qoi.family), &rows)?;
            let mut text = format!("{:>10} {:>14} {:>14} {:>14} {:>14}\n", "param", "u(0,0)", "d/dparam", "integral", "d/dparam");
            let f = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
            for r in &rows {
                text += &format!(
                    "{:>10.5} {:>14} {:>14} {:>14} {:>14}\n",
                    r.param,
                    f(r.qoi_point),
                    f(r.dqoi_point),
                    f(r.qoi_integral),
                    f(r.dqoi_integral)
                );
            }
            text += &format!("wrote {}\n", path.display());
            match rows.iter().find(|r| !r.error.is_empty()) {
                Some(r) => Err(HarnessError::Config(format!("QOI sample {} failed: {}", r.param, r.error))),
                None => Ok(text),
            }
        }
        Command::SpdCheck => {
            let problem = problems::named(&cfg.problem)?;
            let mut rows = Vec::new();
            let mut text = String::new();
            let mut uncertified = None;
            for &n in &cfg.n {
                let (row, cert) = runs::spd_check(&problem, n, settings.strategy)?;
                text += &format!("[N = {n}]\n{}", cert.report());
                if row.verdict == "not-certified" {
                    uncertified.get_or_insert(n);
                }
                rows.push(row);
            }
            let path = write_csv(&dir, &format!("{stem}.csv"), &rows)?;
            text += &format!("wrote {}\n", path.display());
            match uncertified {
                Some(n) if cfg.require_certified => Err(HarnessError::NotCertified { n }),
                _ => Ok(text),
            }
        }
        Command::Eig => {
            let problem = problems::named(&cfg.problem)?;
            let mut rows = Vec::new();
            for &n in &cfg.n {
                rows.push(runs::spectrum(&problem, n, settings, EIG_TOL)?);
            }
            let path = write_csv(&dir, &format!("{stem}.csv"), &rows)?;
            let mut text = format!("{:>6} {:>14} {:>14}\n", "N", "lambda_large", "lambda_small");
            for r in &rows {
                text += &format!("{:>6} {:>14.6} {:>14.6e}\n", r.n, r.lambda_large, r.lambda_small);
            }
            text += &format!("wrote {}\n", path.display());
            Ok(text)
        }
    }
}

fn finish_table(cfg: &ExperimentConfig, dir: &Path, stem: &str, mut sweep: Sweep<ResultRow>) -> Result<String> {
    if cfg.deterministic {
        strip_timings(&mut sweep.rows);
    }
    let path = write_csv(dir, &format!("{stem}.csv"), &sweep.rows)?;
    let text = format!("{}wrote {}\n", summary(&sweep.rows), path.display());
    if let Some((n, info)) = sweep.failures.first() {
        return Err(match info.exit_code {
            2 => HarnessError::Config(format!("N = {n}: {}", info.message)),
            _ => HarnessError::Solver(format!("N = {n}: {}", info.message)),
        });
    }
    if cfg.require_certified {
        if let Some(r) = sweep.rows.iter().find(|r| r.certified == "not-certified") {
            return Err(HarnessError::NotCertified { n: r.n });
        }
    }
    Ok(text)
}

fn dump_debug(cfg: &ExperimentConfig, dir: &Path, stem: &str) -> Result<()> {
    let out = &cfg.output;
    if !(out.dump_mask || out.dump_matrix || out.dump_corrections) {
        return Ok(());
    }
    let problem = problems::named(&cfg.problem)?;
    for &n in &cfg.n {
        let (ctx, sys) = runs::discretize(&problem, n, cfg.strategy()?)?;
        let stem = format!("{stem}_N{n}");
        if out.dump_mask {
            output::dump_mask(dir, &stem, &ctx)?;
        }
        if out.dump_matrix {
            output::dump_matrix(dir, &stem, &sys)?;
        }
        if out.dump_corrections {
            output::dump_corrections(dir, &stem, &sys)?;
        }
    }
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect::<String>()
        .trim_end_matches('_')
        .to_string()
}
