use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("log-derivative evaluated at zero #{index} (x = {x})")]
    AtZero { index: usize, x: f64 },

    #[error("root solver did not converge in bracket [{lo}, {hi}] after {iterations} iterations")]
    NonConvergence { lo: f64, hi: f64, iterations: usize },

    #[error("empty result: {0}")]
    EmptyResult(&'static str),

    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel mass defect: masses sum to {sum}, tail estimate {tail_estimate:e}")]
    MassDefect { sum: f64, tail_estimate: f64 },

    #[error("kernel shape: {0}")]
    KernelShape(&'static str),

    #[error("quadrature reached {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("zero scan found {found} zeros on the circle, expected {expected}")]
    ZeroCount { found: usize, expected: usize },

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::AtStep { step, source: Box::new(self) }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
