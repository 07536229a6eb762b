use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("invalid representation: {0}")]
    Representation(String),
    #[error("unsupported tail: {0}")]
    UnsupportedTail(String),
    #[error("operators use different index schemes ({0} vs {1})")]
    IndexSchemeMismatch(String, String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("sequence is not in X0 (finite total sum)")]
    NotInX0,
    #[error("unsupported pattern of infinite entries: {0}")]
    UnsupportedInfPattern(String),
    #[error("spectrum admits no representable enumeration: {0}")]
    UnsupportedSpectrum(String),
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
