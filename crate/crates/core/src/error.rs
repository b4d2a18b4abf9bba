use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain where the model is defined.
    #[error("parameter domain error: {0}")]
    Domain(String),

    /// A structurally invalid configuration (bad table, inverted thresholds, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// The integrator could not make progress.
    #[error("step size underflow at t = {t:.9e} s (topology: {topology})")]
    StepUnderflow { t: f64, topology: String },

    /// Event bracketing failed to converge.
    #[error("event localization failed at t = {t:.9e} s: {what}")]
    EventBracket { t: f64, what: String },

    /// An internal consistency check of the hybrid state failed.
    #[error("invariant violation at t = {t:.9e} s: {what}")]
    Invariant { t: f64, what: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. } | Error::EventBracket { .. } | Error::Invariant { .. }
        )
    }
}
