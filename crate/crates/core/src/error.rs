use crate::expr::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("degenerate metric on chart `{chart}` at {point:?}: |det| = {det:e} below threshold {threshold:e}")]
    DegenerateMetric { chart: String, point: Vec<f64>, det: f64, threshold: f64 },
    #[error("invalid chart `{chart}`: {reason}")]
    InvalidChart { chart: String, reason: String },
    #[error("coordinate `{0}` is declared by more than one factor")]
    NameCollision(String),
    #[error("{what} references coordinate(s) {coords:?} it is not allowed to depend on")]
    ForbiddenCoordinate { what: String, coords: Vec<String> },
    #[error("warping function {which} is not positive at {point:?} (value {value})")]
    WarpingNotPositive { which: String, point: Vec<f64>, value: f64 },
    #[error("wrong block: {0}")]
    WrongBlock(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("point {point:?} lies outside the box of chart `{chart}`")]
    OutOfBox { chart: String, point: Vec<f64> },
    #[error("integration step {dt:e} underflows at t = {t}")]
    StepUnderflow { t: f64, dt: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
