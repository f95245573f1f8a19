use ebm_core::EbError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] EbError),
    /// A solver failure reported after a sweep finished.
    #[error("solver error: {0}")]
    Solver(String),
    #[error("operator not certified SPD at N = {n}")]
    NotCertified { n: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 2 configuration, 3 solver, 4 certification.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(EbError::Contract(_) | EbError::OutOfRange(_) | EbError::TouchesGridBoundary { .. }) => 2,
            HarnessError::Core(_) | HarnessError::Solver(_) => 3,
            HarnessError::NotCertified { .. } => 4,
            HarnessError::Io(_) | HarnessError::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
