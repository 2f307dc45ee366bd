use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped so that a front end can map them onto coarse exit
/// classes: `Parse` for malformed input files, `Cycle`/`Invalid`/`Domain`/
/// `Range` for well-formed but unusable systems, and `Overflow`/`TooLarge`
/// for refusals on size grounds.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// Precondition violation on otherwise well-formed input.
    #[error("invalid input: {0}")]
    Domain(String),

    /// An extraction or copy addresses positions outside its target.
    #[error("range error: {0}")]
    Range(String),

    /// Structurally broken system (length-equation loop, missing rule, ...).
    #[error("invalid system: {0}")]
    Invalid(String),

    /// Circular dependency found while resolving positions.
    #[error("cycle detected: {0}")]
    Cycle(String),

    #[error("length overflow: {0}")]
    Overflow(String),

    /// Brute-force operation refused because the input exceeds its limit.
    #[error("input too large for brute force: n={n} exceeds limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
