use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ebm_harness::app::{execute, Command};
use ebm_harness::{ExperimentConfig, HarnessError};

/// Embedded boundary experiments: convergence sweeps, spectra, time
/// stepping and QOI sweeps on curved 2D domains.
#[derive(Parser)]
#[command(name = "ebm", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Stationary convergence sweep.
    Poisson(Common),
    /// Crank-Nicolson heat equation sweep.
    Heat(Common),
    /// θ-scheme wave equation sweep.
    Wave(Common),
    /// Star-shaped Helmholtz problem with MINRES.
    Helmholtz(Common),
    /// Quantity-of-interest sweep over a geometry parameter.
    Qoi(Common),
    /// SPD certification report.
    Spdcheck(Common),
    /// Extremal eigenvalues of the assembled operator.
    Eig(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Grid intervals per side, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// mixed or rbf.
    #[arg(long)]
    strategy: Option<String>,
    /// V or W.
    #[arg(long)]
    cycle: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// dt / h.
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    periods: Option<f64>,
    /// ellipse or rotated.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_mask: bool,
    #[arg(long)]
    dump_matrix: bool,
    #[arg(long)]
    dump_corrections: bool,
    #[arg(long)]
    require_certified: bool,
    /// Zero the timing columns.
    #[arg(long)]
    deterministic: bool,
}

impl Common {
    fn into_config(self, cmd: Command) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => defaults(cmd),
        };
        if let Some(p) = self.problem {
            cfg.problem = p;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(s) = self.strategy {
            cfg.strategy = s;
        }
        if let Some(c) = self.cycle {
            cfg.cycle = c;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(t) = self.theta {
            cfg.time.theta = t;
        }
        if let Some(c) = self.cfl {
            cfg.time.cfl = c;
        }
        if let Some(t) = self.t_end {
            cfg.time.t_end = t;
            cfg.time.periods = None;
        }
        if let Some(p) = self.periods {
            cfg.time.periods = Some(p);
        }
        if let Some(f) = self.family {
            cfg.qoi.family = f;
        }
        if let Some(s) = self.samples {
            cfg.qoi.samples = s;
        }
        if let Some(dir) = self.out {
            cfg.output.dir = dir;
        }
        cfg.output.dump_mask |= self.dump_mask;
        cfg.output.dump_matrix |= self.dump_matrix;
        cfg.output.dump_corrections |= self.dump_corrections;
        cfg.require_certified |= self.require_certified;
        cfg.deterministic |= self.deterministic;
        Ok(cfg)
    }
}

/// Per-subcommand defaults when no config file is given.
fn defaults(cmd: Command) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    match cmd {
        Command::Heat => {
            cfg.problem = "heat_disk".into();
            cfg.cycle = "V".into();
        }
        Command::Wave => {
            cfg.problem = "wave_disk".into();
            cfg.time.cfl = 0.7;
            cfg.time.periods = Some(10.2);
        }
        Command::Helmholtz => {
            cfg.problem = "star".into();
            cfg.n = vec![200];
            cfg.tol = 1e-10;
        }
        Command::Qoi => cfg.n = vec![200],
        _ => {}
    }
    cfg
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Sub::Poisson(c) => (Command::Poisson, c),
        Sub::Heat(c) => (Command::Heat, c),
        Sub::Wave(c) => (Command::Wave, c),
        Sub::Helmholtz(c) => (Command::Helmholtz, c),
        Sub::Qoi(c) => (Command::Qoi, c),
        Sub::Spdcheck(c) => (Command::SpdCheck, c),
        Sub::Eig(c) => (Command::Eig, c),
    };
    let result = common.into_config(cmd).and_then(|cfg| execute(cmd, &cfg));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
