use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge (residual {residual:e})")]
    Quadrature { residual: f64 },
    #[error("theta series tail could not be certified below {eps:e}")]
    TailNotCertified { eps: f64 },
    #[error("reduction did not terminate after {iterations} iterations (last y = {last_y:e})")]
    ReductionCap { iterations: usize, last_y: f64 },
    #[error("solution became non-finite at step {step} of {steps}")]
    BlowUp { step: usize, steps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
