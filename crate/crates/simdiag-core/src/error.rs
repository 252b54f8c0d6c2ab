//! Hard failures. "Not SD" and "cannot decide" are verdicts, not errors; they
//! live in [`crate::outcome::SdOutcome`]. An `Error` means the question itself
//! was malformed or a numerical kernel gave up.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not line up.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// An input entry is NaN or infinite.
    NonFinite,
    /// An input collection that must be nonempty was empty.
    EmptyInput,
    /// The iterative eigenvalue / singular value solver did not converge.
    EigensolverFailure,
    /// A congruence factor must be square and numerically nonsingular.
    SingularCongruence { cond: f64 },
    /// Anything else; the message says what was wrong with the argument.
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::NonFinite => write!(f, "input contains a NaN or infinite entry"),
            Error::EmptyInput => write!(f, "input list is empty"),
            Error::EigensolverFailure => write!(f, "eigenvalue solver failed to converge"),
            Error::SingularCongruence { cond } => {
                write!(f, "congruence factor is numerically singular (cond {cond:e})")
            }
            Error::Invalid(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
