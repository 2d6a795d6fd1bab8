use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("model does not define a valid process: {0}")]
    InvalidModel(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("numeric inversion grid too coarse: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    GridTooCoarse { estimate: f64, tolerance: f64 },

    #[error("product density limited to {max} points, got {got}")]
    SizeLimit { max: usize, got: usize },

    #[error("kernel matrix determinant {0:e} is negative beyond round-off slack")]
    NegativeDeterminant(f64),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("spectral truncation mass {mass:e} exceeds tolerance {tolerance:e}; increase the cutoff (suggested {suggested:?})")]
    Truncation {
        mass: f64,
        tolerance: f64,
        suggested: [u32; 3],
    },

    #[error("rejection budget of {budget} proposals exhausted while placing point {point}")]
    RejectionBudget { budget: usize, point: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid point pattern: {0}")]
    InvalidPattern(String),

    #[error("lag grid: {0}")]
    InvalidGrid(String),

    #[error("lag grid exceeds half the window extent: {0}")]
    GridExceedsWindow(String),

    #[error("bandwidth too large: {0}")]
    BandwidthTooLarge(String),

    #[error("no valid model exists inside the parameter bounds")]
    InfeasibleBounds,

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
