use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not a point of the time scale")]
    NotInTimeScale(f64),
    #[error("degenerate time scale: {0}")]
    DegenerateScale(String),
    #[error("invalid time scale: {0}")]
    InvalidTimeScale(String),
    #[error("index {index} out of range for grid with {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("variable `{name}` at byte {offset} exceeds dimension {dim}")]
    VariableOutOfRange { offset: usize, name: String, dim: usize },
    #[error("evaluation error at t = {t}: {message}")]
    Evaluation { t: f64, message: String },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("search space of {size} lattice points exceeds cap {cap}")]
    SearchSpaceTooLarge { size: f64, cap: f64 },
    #[error("no lattice point satisfies the constraints")]
    NoFeasiblePoint,
    #[error("{context}, line {line}, column {column}: {message}")]
    Format {
        context: String,
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
