use alloc::string::String;
use core::fmt;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A probability vector or table failed validation.
    InvalidProbability(String),
    /// Conditioning on a set of zero mass.
    ZeroMass,
    /// Two vectors that must share a dimension do not.
    DimensionMismatch { left: usize, right: usize },
    /// Two blocks or series that must share a length do not.
    LengthMismatch { left: usize, right: usize },
    /// An index lies outside the valid range.
    IndexOutOfRange { index: usize, len: usize },
    /// A numeric argument lies outside the domain of the operation.
    DomainError(String),
    /// An exhaustive scan would exceed the enumeration cap.
    EnumerationCapExceeded { states: f64, cap: u64 },
    /// A coordinate beyond the materialized horizon was requested.
    HorizonExceeded { requested: usize, horizon: usize },
    /// No block passed the good-measure filter.
    EmptyCandidateSet { window_len: usize },
    /// A greedy family ran out of candidates.
    FamilyExhausted { parent: String },
    /// Construction parameters violate a precondition or budget.
    InfeasibleParameters(String),
    /// An integer computation overflowed.
    Overflow,
    /// A schedule endpoint exceeds the horizon cap.
    OverflowRisk { endpoint: u128, cap: u64 },
    /// A distance series was empty.
    EmptySeries,
    /// A symbol index is not in the alphabet.
    InvalidSymbol { symbol: usize, alphabet: usize },
    /// A structural invariant (schedule, tree, series) was violated.
    Invalid(String),
    /// Text input could not be parsed.
    Parse { line: usize, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidProbability(msg) => write!(f, "invalid probability data: {msg}"),
            Error::ZeroMass => write!(f, "conditioning set has zero mass"),
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::LengthMismatch { left, right } => write!(f, "length mismatch: {left} vs {right}"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::DomainError(msg) => write!(f, "domain error: {msg}"),
            Error::EnumerationCapExceeded { states, cap } => {
                write!(f, "enumeration of {states:.0} states exceeds cap {cap}")
            }
            Error::HorizonExceeded { requested, horizon } => {
                write!(f, "coordinate {requested} beyond materialized horizon {horizon}")
            }
            Error::EmptyCandidateSet { window_len } => {
                write!(f, "no good candidate block of length {window_len}")
            }
            Error::FamilyExhausted { parent } => {
                write!(f, "candidate family of parent '{parent}' exhausted")
            }
            Error::InfeasibleParameters(msg) => write!(f, "infeasible parameters: {msg}"),
            Error::Overflow => write!(f, "integer overflow"),
            Error::OverflowRisk { endpoint, cap } => {
                write!(f, "schedule endpoint {endpoint} exceeds horizon cap {cap}")
            }
            Error::EmptySeries => write!(f, "empty distance series"),
            Error::InvalidSymbol { symbol, alphabet } => {
                write!(f, "symbol {symbol} not in alphabet of size {alphabet}")
            }
            Error::Invalid(msg) => write!(f, "{msg}"),
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

#[cfg(feature = "std")]
extern crate std;

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
