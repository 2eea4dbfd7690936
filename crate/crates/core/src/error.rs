use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed an argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("division by an interval containing zero")]
    DivisionByZero,

    /// An enclosure could not be tightened enough to decide a sign or a digit string.
    #[error("indeterminate after {escalations} precision escalations (last precision {bits} bits)")]
    Indeterminate { bits: u32, escalations: u32 },

    /// A consistency check that must hold on a correct build failed.
    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
