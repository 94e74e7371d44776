use thiserror::Error;

use crate::order::GroupElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("invalid endomorphism: {0}")]
    InvalidEndomorphism(String),

    #[error("positive cone is not pointed")]
    ConeNotPointed,

    #[error("coboundary condition fails: {0:?} is a nonzero positive coboundary")]
    CoboundaryFails(GroupElement),

    #[error("element {0:?} is not a nonzero positive element")]
    NotPositive(GroupElement),

    #[error("state is not invariant under generator {0}")]
    NotInvariant(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no rational approximant within the requested tolerance")]
    InfeasibleTolerance,

    #[error("a nonzero multiple of the unit lies in the subgroup")]
    UnitInSubgroup,

    #[error("no state vanishes on the subgroup: {0}")]
    NoStateExtension(String),

    #[error("enumerated element {0:?} is not positive")]
    EnumerationNotPositive(GroupElement),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("deadline exceeded")]
    DeadlineExceeded,

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
