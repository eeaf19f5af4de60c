use std::io;

use crate::word::Word;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },

    /// `Id - sum(M_sigma)` is singular or numerically close to it.
    #[error("normalizer unavailable: Id - sum of transition matrices is singular")]
    NormalizerUnavailable,

    #[error("degenerate prefix {prefix}: prefix mass {mass} is not positive")]
    DegeneratePrefix { prefix: Word, mass: f64 },

    #[error("degenerate Hankel block: no singular value above tolerance")]
    DegenerateHankel,

    #[error("basis sampling stalled after {draws} draws without growth (size {size}, target {target})")]
    BasisExhausted { draws: usize, size: usize, target: usize },

    #[error("oracle lacks the `{0}` capability")]
    CapabilityMissing(&'static str),

    #[error("oracle transport failure: {message} (line: {line:?})")]
    OracleTransport { message: String, line: String },

    /// An oracle query failed; carries the string that was being scored.
    #[error("query for {word} failed: {source}")]
    Query {
        word: Word,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn transport(msg: impl Into<String>, line: impl Into<String>) -> Self {
        Error::OracleTransport {
            message: msg.into(),
            line: line.into(),
        }
    }

    /// True for failures caused by numerical degeneracy rather than input or I/O.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NormalizerUnavailable
            | Error::DegeneratePrefix { .. }
            | Error::DegenerateHankel
            | Error::BasisExhausted { .. } => true,
            Error::Query { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
