use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A warping function was zero or negative where the frame needs it positive.
    #[error("non-positive warping value {value} at grid index {index} (component {component})")]
    NonPositiveWarping {
        index: usize,
        component: usize,
        value: f64,
    },

    #[error("t = {t} lies outside the solution domain ({lo}, {hi})")]
    OutsideDomain { t: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("malformed profile: {0}")]
    Profile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
