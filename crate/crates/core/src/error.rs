use thiserror::Error;

/// Which factor of the endpoint velocity denominator vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VanishingFactor {
    /// `h(β_i) = 0` at endpoint `index`.
    DensityPolynomial { index: usize },
    /// Two consecutive endpoints `index` and `index + 1` coincide.
    Gap { index: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("endpoint velocity is singular: {factor:?}")]
    Singularity { factor: VanishingFactor },

    #[error("integration failed at T = {temperature} (endpoints {endpoints:?}): {reason}")]
    Integration {
        temperature: f64,
        endpoints: Vec<f64>,
        reason: String,
    },

    #[error("singular density at T = {temperature}: {reason}")]
    SingularDensity { temperature: f64, reason: String },

    #[error("seeding failed: {0}")]
    Seed(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
