//! Error type shared by every engine module.

use thiserror::Error;

/// Crate-wide error enum. Variants mirror the failure classes of the public
/// operations: input validation, name lookup, text parsing, mathematical
/// infeasibility, size limits, and internal consistency checks.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument failed a documented precondition. The message names the
    /// offending field or quantity.
    #[error("validation: {0}")]
    Validation(String),

    /// A name (builtin scenario, family, state) is not known.
    #[error("unknown name `{0}`")]
    Lookup(String),

    /// A scenario file failed to parse. Carries the source location.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// The requested computation has no solution (empty polytope, infeasible
    /// model, zero quantum value, ...).
    #[error("model: {0}")]
    Model(String),

    /// A size cap was exceeded (setting counts, outcome counts).
    #[error("resource limit: {0}")]
    Resource(String),

    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
