//! Experiment engine for the ebm toolkit: named test problems, error
//! norms, convergence sweeps and CSV output.

pub mod app;
pub mod config;
pub mod error;
pub mod norms;
pub mod output;
pub mod problems;
pub mod qoi;
pub mod runs;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use runs::{ResultRow, Settings, Sweep};
