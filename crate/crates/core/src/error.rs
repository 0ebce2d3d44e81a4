use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("profiles live on different grids")]
    GridMismatch,

    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (error estimate {error_estimate:e})")]
    Quadrature {
        subdivisions: usize,
        error_estimate: f64,
    },

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("iteration cap of {iterations} reached")]
    IterationCap { iterations: usize },

    #[error("window [{start}, {end}] exceeds the profile domain of length {length}")]
    WindowOutOfDomain { start: f64, end: f64, length: f64 },

    #[error("integration step underflow at x = {x}")]
    StepUnderflow { x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
