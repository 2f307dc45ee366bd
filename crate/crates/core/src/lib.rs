//! String representations for repetitive sequences and their size measures.
//!
//! The crate implements four ways to describe a string and converts between
//! them:
//!
//! - [`macro_scheme`]: bidirectional macro schemes, phrase factorizations
//!   whose copy sources may lie left or right of the phrase.
//! - [`grammar`]: plain context-free grammars with one rule per nonterminal
//!   (straight-line programs).
//! - [`macro_system`]: grammar-like rule systems extended with extraction
//!   symbols `A[i,j]` denoting substrings of a variable's expansion.
//! - [`lsystem`] and [`nusystem`]: iterated-morphism systems (CD0L), the
//!   latter extended with leveled extractions `A(l)[i,j]`.
//!
//! The [`measures`] module computes the repetitiveness measures attached to
//! these representations: the substring-complexity measure delta, the LZ76
//! phrase count z, and brute-force smallest attractors (gamma) and smallest
//! macro schemes (b) for tiny inputs.

pub mod error;
pub mod format;
pub mod grammar;
pub mod lsystem;
pub mod macro_scheme;
pub mod macro_system;
pub mod measures;
pub mod nusystem;
mod sam;
pub mod text;

pub use error::{Error, Result};
pub use text::Text;

/// Exact rational used for delta and other measure comparisons.
pub type Rational = num_rational::Ratio<u64>;
