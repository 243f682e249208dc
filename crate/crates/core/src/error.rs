use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violated an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step size {dt:e} s exceeds the resolution limit {limit:e} s")]
    StepSize { dt: f64, limit: f64 },

    /// A pulse sequence failed validation.
    #[error("invalid sequence: {0}")]
    Sequence(String),

    /// Propagation of one ensemble member produced a non-physical state.
    #[error("numeric failure at delta_opt = {delta_opt} Hz, delta_spin = {delta_spin} Hz: {reason}")]
    Numeric {
        delta_opt: f64,
        delta_spin: f64,
        reason: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
