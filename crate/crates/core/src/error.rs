use thiserror::Error;

/// Errors raised by the numerical modules. `code()` gives a stable
/// machine-readable cause string for reports.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FlowError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("method error: {0}")]
    Method(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("singularity error: {0}")]
    Singularity(String),
    #[error("algebra error: {0}")]
    Algebra(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("flow event: {0}")]
    FlowEvent(String),
}

impl FlowError {
    pub fn code(&self) -> &'static str {
        match self {
            FlowError::Domain(_) => "domain",
            FlowError::Size(_) => "size",
            FlowError::Geometry(_) => "geometry",
            FlowError::Method(_) => "method",
            FlowError::Accuracy(_) => "accuracy",
            FlowError::Singularity(_) => "singularity",
            FlowError::Algebra(_) => "algebra",
            FlowError::Resolution(_) => "resolution",
            FlowError::Degenerate(_) => "degenerate",
            FlowError::FlowEvent(_) => "flow_event",
        }
    }
}

pub type Result<T> = std::result::Result<T, FlowError>;
