//! The Γ-ultraproduct: ultrafilter descriptors, symbolic sequences,
//! membership and witness search, Γ-hulls, Łoś-transfer verification and the
//! Γ-closed / Γ-nice checkers.

mod context;
mod decide;
mod extension;
mod filter;
mod hull;
mod los;
mod membership;
mod sequence;

use thiserror::Error;

use crate::formula::FormulaError;
use crate::structures::EvalError;

pub use context::{omission_table, realizer, Family, GammaContext, Realization};
pub use decide::{element_order, formula_bound, holds, sat_set, EVALUATION_BUDGET};
pub use extension::{proper_extension_criterion, torsion_criterion, ultrapower_collapse_check, CollapseVerdict, ExtensionVerdict};
pub use filter::{Largeness, SatSet, UltrafilterDescriptor};
pub use hull::{
    check_gamma_closed, check_gamma_nice, finite_hull, gamma_hull, hull_mask, ClosureCheck, ClosureSubject,
    FunctionClosure, HullReport, SchemeEntry, TheoryTag, MAX_PROFILES,
};
pub use los::{principal_collapse, verify_los_finite, ClassTally, CollapseReport, FormulaReport, Sampling, TransferReport};
pub use membership::{pointwise, gup_sum_check, membership_check, u_equal, Certificate, MembershipVerdict};
pub use sequence::{apply_op, combine_tails, map_tail, DefinableSequence, Tail};

#[derive(Debug, Error)]
pub enum UltraError {
    #[error("invalid context: {0}")]
    Context(String),
    #[error("invalid sequence: {0}")]
    Sequence(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

#[cfg(test)]
mod tests;
