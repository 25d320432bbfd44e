use thiserror::Error;

/// Errors raised by the evaluators and operators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument {x} outside supported range: {reason}")]
    OutOfRange { x: f64, reason: &'static str },

    #[error("quadrature did not reach tolerance {tolerance:e}: estimate {estimate:e}, error {error:e}")]
    Tolerance { estimate: f64, error: f64, tolerance: f64 },

    #[error("kernel is singular at v = v*")]
    Singular,

    #[error("time step {dt:e} exceeds the stability bound {bound:e}; reduce --dt or coarsen the grid")]
    StepSize { dt: f64, bound: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("output error: {0}")]
    Io(String),

    #[error("grid of {n} nodes per axis exceeds the supported size {max}")]
    Budget { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
