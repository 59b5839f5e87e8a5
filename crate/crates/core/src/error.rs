use thiserror::Error;

use crate::nat::Nat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input text (automaton, SLP, rooting or expression files).
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    /// Arguments outside an operation's domain.
    #[error("{0}")]
    Domain(String),

    /// A requested answer index outside `1..=total`.
    #[error("index {index} is out of range: the answer set has {total} element(s)")]
    OutOfRange { index: Nat, total: Nat },

    /// An input larger than an explicit size bound.
    #[error("size limit exceeded: {0}")]
    Size(String),

    /// An edit expression whose indices do not fit the string they act on.
    #[error("invalid index in `{expr}`: {message}")]
    EditIndex { expr: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
