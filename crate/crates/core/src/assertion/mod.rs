//! Exact set algebra over typed variable valuations.
//!
//! Assertions are finite unions of axis-aligned boxes over a bounded universe,
//! so union, intersection, complement, inclusion and emptiness are all exact.

mod atom;
mod set;
mod variable;

use thiserror::Error;

pub use atom::{Atom, Interval, LabelSet};
pub use set::{AssertionSet, Hyperbox};
pub(crate) use variable::Coord;
pub use variable::{Alphabet, Domain, Valuation, Value, VarKind, VariableDecl, MAX_LABELS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("operands are defined over different alphabets")]
    AlphabetMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("valuation has no value for `{0}`")]
    MissingVariable(String),
    #[error("value {value} of `{variable}` lies outside its domain {domain}")]
    DomainViolation {
        variable: String,
        value: String,
        domain: String,
    },
    #[error("variable `{0}` is missing from the target alphabet")]
    NotASuperAlphabet(String),
    #[error("conflicting declarations of `{variable}`: {reason}")]
    VariableDeclConflict { variable: String, reason: String },
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("invalid declaration of `{variable}`: {reason}")]
    InvalidDeclaration { variable: String, reason: String },
    #[error("constraint does not fit {kind} variable `{variable}`")]
    KindMismatch { variable: String, kind: VarKind },
}
