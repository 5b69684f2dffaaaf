//! Signatures, terms and formulas: parsing, printing, classification, and
//! the builders the rest of the crate consumes.

mod ast;
mod classify;
mod invariants;
mod parser;
mod pp;
mod print;
mod signature;
mod types;

pub use ast::{fresh_name, Atom, Formula, Term};
pub use classify::{classify_quantifier, prefix_class, prenex, to_nnf, Prenex, QuantClass, Quantifier};
pub use invariants::InvCondition;
pub use parser::{parse_formula, parse_term};
pub use pp::{linearize, recognize_pp, LinComb, NotPP, PPCond, PPNormal, UnaryCond, UnaryPP};
pub use print::print_formula;
pub use signature::{ScalarRing, Signature};
pub use types::{build_psi_ell, negate, ChoiceFunction, TypeSource, UnaryTypePresentation};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: expected {expected}, found {found}")]
    Syntax { pos: usize, expected: String, found: String },
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("`{symbol}` takes {expected} argument(s), got {found}")]
    Arity { symbol: String, expected: usize, found: usize },
    #[error("scalar syntax at byte {pos} needs a scalar-flagged signature")]
    NoScalars { pos: usize },
    #[error("`{text}` at byte {pos} is not a prime power p^n with n >= 1")]
    BadDivisor { pos: usize, text: String },
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("invalid type presentation: {0}")]
    Type(String),
    #[error("type `{name}` is truncated at depth {have}, {need} formulas needed")]
    TruncationTooShallow { name: String, have: usize, need: usize },
    #[error("expected one free variable, found {0:?}")]
    MultipleFreeVariables(Vec<String>),
    #[error("{0}")]
    NotPP(String),
}

#[cfg(test)]
mod tests;
