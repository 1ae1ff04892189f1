use thiserror::Error;

/// Errors produced by the engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty step string")]
    EmptyInput,
    #[error("invalid step character {0:?} (expected one of R, L, U, D)")]
    InvalidStep(char),
    #[error("NotClosed: walk ends at ({0}, {1}) instead of the origin")]
    NotClosed(i32, i32),
    #[error("NotSimple: vertex ({0}, {1}) is visited twice")]
    NotSimple(i32, i32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("inexact division: {0}")]
    InexactDivision(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("QuadratureNotConverged: offset ({dx}, {dy}) after {evaluations} evaluations")]
    QuadratureNotConverged { dx: i64, dy: i64, evaluations: usize },
    #[error("PrecisionInsufficient: {0}")]
    PrecisionInsufficient(String),
    #[error("InsufficientData: {0}")]
    InsufficientData(String),
    #[error("SapDoesNotFit: patch of extent {extent} does not embed in a torus of side {side}")]
    SapDoesNotFit { extent: i32, side: usize },
    #[error("ZeroDensity: f({0}) = 0")]
    ZeroDensity(usize),
    #[error("OpenWalkNoLast: walk ends at ({0}, {1}), last erased loop is undefined")]
    OpenWalkNoLast(i32, i32),
    #[error("LengthTooLarge: length {len} exceeds the bound {max}")]
    LengthTooLarge { len: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("CorruptRecord at line {line}: {message}")]
    CorruptRecord { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
