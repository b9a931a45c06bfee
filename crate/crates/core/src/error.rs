use thiserror::Error;

/// Errors raised by the library.
///
/// `InvalidParameter` covers malformed values (a negative scale, an empty
/// interval); `Precondition` covers well-formed values that violate an
/// operation's domain, such as an offset window that does not fit below
/// `⌊√n⌋`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported source model: {0}")]
    UnsupportedModel(String),

    #[error("exhaustive enumeration over n = {n} exceeds the limit {max}")]
    TooLarge { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}
