use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed code: {0}")]
    Malformed(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("table format error: {0}")]
    Format(String),

    #[error("machine version mismatch: expected {expected}, found {found}")]
    Version { expected: String, found: String },

    #[error("{what} exceeds cap {cap}")]
    CapExceeded { what: String, cap: u64 },

    #[error("{0} is not a member of the model")]
    NotMember(String),

    #[error("no program of length <= {cap} outputs {x}; rebuild with a larger length cap")]
    Absent { x: String, cap: u32 },

    #[error("budget too small: {0}")]
    Budget(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
