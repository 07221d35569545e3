use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("symbol is not conjugate-symmetric at k = {k}")]
    Symmetry { k: i64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate parameterization: s_alpha = {value} at node {index}")]
    DegenerateParameterization { index: usize, value: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("no steady solution: mean force {0:e} is not zero")]
    NoSteadySolution(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("blowup at step {step}: {reason}")]
    Blowup { step: u64, reason: String },

    #[error("iterative solver stalled after {iterations} iterations (residual {residual:e})")]
    SolverStall { iterations: usize, residual: f64 },

    #[error("singular linear system (condition estimate {0:e})")]
    SingularSystem(f64),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }

    /// True for failures of the numerical method itself (blowup) as opposed to
    /// failures of the linear algebra or of the inputs.
    pub fn is_instability(&self) -> bool {
        matches!(self, Error::Blowup { .. })
    }

    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::SolverStall { .. } | Error::SingularSystem(_))
    }
}
