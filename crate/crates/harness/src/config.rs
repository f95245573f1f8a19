//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use ebm_core::interpolation::Strategy;
use ebm_core::linalg::Cycle;
use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "EBM_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    /// Grid intervals per side.
    pub n: Vec<usize>,
    /// `mixed` or `rbf`.
    pub strategy: String,
    /// `V` or `W`.
    pub cycle: String,
    /// Relative residual for CG and MINRES.
    pub tol: f64,
    /// Exit with code 4 when an operator is not certified.
    pub require_certified: bool,
    /// Write zeros in the timing columns so reruns are bit-identical.
    pub deterministic: bool,
    pub time: TimeConfig,
    pub qoi: QoiConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub theta: f64,
    /// `dt / h`.
    pub cfl: f64,
    /// Final time; for the wave problem `periods` takes precedence when set.
    pub t_end: f64,
    pub periods: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QoiConfig {
    /// `ellipse` (u at the origin against a) or `rotated` (integral against alpha).
    pub family: String,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub dump_mask: bool,
    pub dump_matrix: bool,
    pub dump_corrections: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "glass".into(),
            n: vec![50, 100, 200],
            strategy: "mixed".into(),
            cycle: "W".into(),
            tol: 1e-12,
            require_certified: false,
            deterministic: false,
            time: TimeConfig::default(),
            qoi: QoiConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            theta: 0.0,
            cfl: 1.0,
            t_end: 0.5,
            periods: None,
        }
    }
}

impl Default for QoiConfig {
    fn default() -> Self {
        Self {
            family: "ellipse".into(),
            samples: 41,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            dump_mask: false,
            dump_matrix: false,
            dump_corrections: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn strategy(&self) -> Result<Strategy> {
        self.strategy.parse().map_err(|e| HarnessError::Config(format!("{e}")))
    }

    pub fn cycle(&self) -> Result<Cycle> {
        self.cycle.parse().map_err(|e| HarnessError::Config(format!("{e}")))
    }

    /// `EBM_OUTPUT_DIR` when set, the configured directory otherwise.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.dir.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.strategy()?;
        self.cycle()?;
        if self.n.is_empty() {
            return Err(HarnessError::Config("empty N list".into()));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 8) {
            return Err(HarnessError::Config(format!("N = {n} is below the minimum of 8")));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(HarnessError::Config(format!("tolerance {} outside (0, 1)", self.tol)));
        }
        if !(self.time.cfl > 0.0) {
            return Err(HarnessError::Config("dt/h must be positive".into()));
        }
        if !(self.time.theta >= 0.0) {
            return Err(HarnessError::Config("theta must be non-negative".into()));
        }
        if !(self.time.t_end > 0.0) || self.time.periods.is_some_and(|p| !(p > 0.0)) {
            return Err(HarnessError::Config("final time must be positive".into()));
        }
        if self.qoi.samples < 3 {
            return Err(HarnessError::Config("a QOI sweep needs at least 3 samples".into()));
        }
        if !matches!(self.qoi.family.as_str(), "ellipse" | "rotated") {
            return Err(HarnessError::Config(format!("unknown QOI family `{}`", self.qoi.family)));
        }
        Ok(())
    }
}
