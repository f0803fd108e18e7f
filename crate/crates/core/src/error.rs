use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain of {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    #[error("{function} out of representable range: {detail}")]
    Range { function: &'static str, detail: String },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    QuadratureFailure { estimate: f64, error_bound: f64 },

    #[error("matrix dimension {requested} exceeds the configured cap {cap} (set GROKKLAB_MAX_DIM to raise it)")]
    SizeLimit { requested: usize, cap: usize },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("gradient descent diverged at t = {time}: step-size bound {bound} violated")]
    Instability { time: f64, bound: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("outside the validity regime: {0}")]
    OutOfRegime(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
