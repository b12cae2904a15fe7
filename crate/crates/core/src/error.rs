use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration value violates its invariant. `field` is the dotted
    /// path of the offending value, e.g. `world.n_rows`.
    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("cannot fit a line: all cluster points coincide")]
    DegenerateCluster,

    #[error("need at least {needed} end points, got {got}")]
    NotEnoughEndPoints { needed: usize, got: usize },

    #[error("no samples to evaluate: {0}")]
    NoSamples(&'static str),

    #[error("log timestamps must be strictly increasing (at t = {0})")]
    NonMonotonicTime(f64),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
