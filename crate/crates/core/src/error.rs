use thiserror::Error;

/// Errors raised by the numerical and channel layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// Argument sits within the guard band of a gamma-function pole.
    #[error("argument {arg} is within {guard:e} of a pole at {pole}")]
    PoleProximity { arg: f64, pole: f64, guard: f64 },

    /// Numerical iteration did not settle. Carries the best available estimate.
    #[error("{what} did not converge (estimate {estimate:e}, error {error_estimate:e})")]
    Convergence {
        what: &'static str,
        estimate: f64,
        error_estimate: f64,
    },

    #[error("no beam power on the detector")]
    NoSignal,

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
