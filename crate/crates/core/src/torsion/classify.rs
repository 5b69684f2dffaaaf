//! The dividing line for countable torsion modules.

use serde::Serialize;

use crate::structures::TorsionGroup;
use crate::ultraproduct::{torsion_criterion, ExtensionVerdict};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case")]
pub enum DividingLine {
    /// No `n` bounds the order of infinitely many elements.
    CaseA { certificates: Vec<String> },
    /// Infinitely many elements have order dividing `n`: torsion
    /// universal extensions exist in every size.
    CaseB { n: u64, family: String },
}

impl DividingLine {
    pub fn is_case_b(&self) -> bool {
        matches!(self, DividingLine::CaseB { .. })
    }
}

pub fn dividing_line(g: &TorsionGroup) -> DividingLine {
    match torsion_criterion(g) {
        ExtensionVerdict::Yes { bound, family, .. } => DividingLine::CaseB {
            n: bound.expect("torsion criteria name the order bound"),
            family,
        },
        ExtensionVerdict::No { certificates } => DividingLine::CaseA { certificates },
        ExtensionVerdict::Undecided { .. } => unreachable!("the torsion criterion always decides"),
    }
}
