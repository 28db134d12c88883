use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("Hilbert dimension {requested} exceeds the configured maximum {max}")]
    Capacity { requested: usize, max: usize },

    #[error("operator is not Hermitian: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("consistency violation: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Verification(_) => 1,
            LabError::Config(_) => 2,
            LabError::Io(_) => 2,
            LabError::Shape(_)
            | LabError::Capacity { .. }
            | LabError::NotHermitian { .. }
            | LabError::Numeric(_)
            | LabError::Consistency(_) => 3,
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
