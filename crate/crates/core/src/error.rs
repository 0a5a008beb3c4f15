use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("grid too coarse: {0}")]
    Refinement(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("mode error: {0}")]
    Mode(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    /// Configuration problems map to exit code 2, everything else to 3.
    pub fn is_schema(&self) -> bool {
        matches!(self, LabError::Config(_))
    }
}
