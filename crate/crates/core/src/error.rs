use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("indentation depth {depth} mm must stay below {limit} mm")]
    IndentationTooDeep { depth: f64, limit: f64 },
    #[error("force {force} N exceeds the spring limit of {max} N")]
    ForceOutOfRange { force: f64, max: f64 },
    #[error("scene is inconsistent: {0}")]
    InvalidScene(&'static str),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("samples are degenerate: {0}")]
    DegenerateSamples(&'static str),
    #[error("force table keeps {0} monotone knots, at least 2 are required")]
    TooFewKnots(usize),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}
