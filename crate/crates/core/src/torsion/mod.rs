//! The torsion-module layer: order propagation through terms, the
//! tor-ultraproduct, p.p. Łoś verification, elementary-equivalence testing
//! through invariants, and the dividing-line classifier.

mod classify;
mod ee;
mod los;
mod order;
mod tor;

use thiserror::Error;

use crate::formula::FormulaError;
use crate::structures::EvalError;
use crate::ultraproduct::UltraError;

pub use classify::{dividing_line, DividingLine};
pub use ee::{ee_invariants_check, pp_family, EeVerdict};
pub use los::{is_isomorphic, tor_los_pp_verify, InvariantsTransfer, TorLosReport};
pub use order::{order_propagation, propagate};
pub use tor::{tor_divisibility, tor_membership, DivisibilityVerdict, TorMembership, TorVerdict, WITNESS_SAMPLES};

#[derive(Debug, Error)]
pub enum TorsionError {
    #[error("term error: {0}")]
    Term(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Ultra(#[from] UltraError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}
