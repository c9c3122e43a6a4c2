use thiserror::Error;

/// Errors raised by the transform engine, detectors, and scenario runner.
#[derive(Debug, Error)]
pub enum WfsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(
        "NYQUIST_EXCEEDED: requested frequency {requested:.3} outside resolved band {band:.3}"
    )]
    NyquistExceeded { requested: f64, band: f64 },

    #[error("WINDOW_UNRESOLVED: lambda^(1/2)*dx = {ratio:.4} exceeds 1/4")]
    WindowUnresolved { ratio: f64 },

    #[error("RESOLUTION_BUDGET: grid needs {needed} bytes, budget is {budget}")]
    ResolutionBudget { needed: u64, budget: u64 },

    #[error("UNSUPPORTED: {0}")]
    Unsupported(String),

    #[error("UNRESOLVED_BAND: only {octaves:.2} octaves available, need at least 4")]
    UnresolvedBand { octaves: f64 },

    #[error("EMPTY_VOLUME: {0}")]
    EmptyVolume(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl WfsError {
    /// Whether the error is a configuration/precondition problem (as opposed to an
    /// engine failure at run time).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            WfsError::InvalidArgument(_)
                | WfsError::Parse(_)
                | WfsError::NyquistExceeded { .. }
                | WfsError::WindowUnresolved { .. }
                | WfsError::ResolutionBudget { .. }
                | WfsError::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, WfsError>;
