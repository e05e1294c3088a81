use thiserror::Error;

/// Error type shared by every module in the crate.
///
/// Each variant maps to a distinct process exit code so that shell
/// pipelines can distinguish configuration mistakes from numerical
/// failures.
#[derive(Debug, Error)]
pub enum LabError {
    /// Invalid configuration value or flag; names the offending key.
    #[error("config error: {0}")]
    Config(String),

    /// A root solve failed (bracket lost or iteration cap exhausted).
    #[error("solver failure: {0}")]
    Solver(String),

    /// An iterative scheme stopped at the iteration cap before reaching
    /// its tolerance; the message carries the final residual.
    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Exit code for the CLI: 2 config, 3 solver, 4 non-convergence, 5 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Solver(_) => 3,
            LabError::NonConvergence(_) => 4,
            LabError::Io(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
