use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: &'static str },
    #[error("variable index {0} has no value at the evaluation point")]
    UnboundVariable(usize),
    #[error("operands live on different charts")]
    ChartMismatch,
    #[error("{op}: unsupported degree {degree}")]
    UnsupportedDegree { op: &'static str, degree: usize },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("expression parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { name: String, column: usize },
    #[error("structure is not integrable: {residual} = {value:e}")]
    NotIntegrable { residual: String, value: f64 },
    #[error("rank is ambiguous at {point:?} (conditioning gap {gap:e})")]
    IllConditioned { point: Vec<f64>, gap: f64 },
    #[error("singular linear system (residual {residual:e}): {context}")]
    SingularSystem { context: String, residual: f64 },
    #[error("restriction refused: intersection dimension {found} differs from {expected} at {point:?}")]
    RankDrop { point: Vec<f64>, expected: usize, found: usize },
    #[error("integration failed at step {step}")]
    StepFailure { step: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
