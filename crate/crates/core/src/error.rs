use alloc::string::String;
use core::fmt;

/// Errors reported by the library.
///
/// Every fallible operation documents which variants it can produce; data
/// errors carry enough context (row/column, index, parameter name) to point
/// at the offending input.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input collection was empty where data is required.
    Empty(&'static str),
    /// Two inputs that must agree in size do not.
    SizeMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    /// An index is outside its valid range.
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    /// A scalar parameter violates its documented range.
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    /// Malformed or non-finite data at a specific row/column of a parsed
    /// buffer or constructed matrix. Row and column are 0-based.
    Parse {
        row: usize,
        col: usize,
        message: String,
    },
    /// A query was counted more than once (or not at all) in a confusion
    /// tally that must partition the query set.
    QueryPartition { query: usize, message: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty(what) => write!(f, "{what} is empty"),
            Error::SizeMismatch { what, left, right } => {
                write!(f, "size mismatch in {what}: {left} vs {right}")
            }
            Error::IndexOutOfRange { what, index, len } => {
                write!(f, "{what} index {index} out of range (len {len})")
            }
            Error::ParamOutOfRange {
                name,
                value,
                min,
                max,
            } => write!(f, "parameter {name}={value} outside [{min}, {max}]"),
            Error::Parse { row, col, message } => {
                write!(f, "row {row}, column {col}: {message}")
            }
            Error::QueryPartition { query, message } => {
                write!(f, "query {query}: {message}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
