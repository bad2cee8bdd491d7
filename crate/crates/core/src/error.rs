use thiserror::Error;

/// Errors produced by the reduction and stability machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular resolvent operator (m = {m})")]
    SingularOperator { m: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),

    #[error("orbit not closed: return residual {residual:e}")]
    OrbitNotClosed { residual: f64 },

    #[error("continuation failed after {iterations} Newton iterations (residual {residual:e})")]
    ContinuationFailed { iterations: usize, residual: f64 },

    #[error("Poincaré section is not transversal at the crossing (phase velocity {velocity})")]
    SectionTangency { velocity: f64 },

    #[error("splay amplitude has no real solution (discriminant {0})")]
    NoRealAmplitude(f64),

    #[error("degenerate period: rotation frequency {0} is zero")]
    DegeneratePeriod(f64),

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error stems from the input rather than from a computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::Unsupported(_)
                | Error::Domain(_)
                | Error::DimensionMismatch { .. }
                | Error::Io(_)
                | Error::Serde(_)
        )
    }
}
