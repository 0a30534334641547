use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("Hamiltonian is not Hermitian (max |H - H^dagger| = {0:e})")]
    NonHermitian(f64),

    #[error("step size underflow at t = {t} ns (h = {h:e} ns)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {steps} exhausted at t = {t} ns")]
    MaxSteps { steps: usize, t: f64 },

    #[error("non-finite state encountered at t = {t} ns")]
    NonFinite { t: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// True for failures raised by the time integrator.
    pub fn is_integration_failure(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. } | Error::MaxSteps { .. } | Error::NonFinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
