//! When is a Γ-ultrapower a proper extension?
//!
//! A structure `M` has proper Γ-ultrapowers exactly when some choice
//! function `C` leaves infinitely many elements of `M` satisfying every
//! selected negation. Finite structures never do. For torsion groups with
//! `Γ = {tor}` the criterion reads: some `n` bounds the order of infinitely
//! many elements, which for a formal direct sum happens exactly when some
//! summand has multiplicity omega or is a tail. Over the naturals the set
//! `X_C` is tested along the identity sequence with the tail decider.

use serde::Serialize;

use super::context::{Family, GammaContext};
use super::decide::sat_set;
use super::filter::{SatSet, UltrafilterDescriptor};
use super::membership::{membership_check, MembershipVerdict};
use super::sequence::DefinableSequence;
use super::UltraError;
use crate::formula::{ChoiceFunction, UnaryTypePresentation};
use crate::structures::{Affine, Multiplicity, NatModel, StructureHandle, Summand, TorsionGroup};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ExtensionVerdict {
    /// Every element of `family` satisfies the negations selected by
    /// `witness`; `bound` is the order bound for torsion groups.
    Yes {
        witness: ChoiceFunction,
        bound: Option<u64>,
        family: String,
    },
    /// Per choice function (or per summand), why the set is finite.
    No { certificates: Vec<String> },
    Undecided { reason: String },
}

impl ExtensionVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, ExtensionVerdict::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, ExtensionVerdict::No { .. })
    }
}

fn is_tor_only(gamma: &[UnaryTypePresentation]) -> bool {
    gamma.len() == 1 && gamma[0].is_tor()
}

/// The first summand with infinitely many elements of prime order, with
/// that prime.
fn infinite_socle(g: &TorsionGroup) -> Option<(usize, u64)> {
    g.summands.iter().enumerate().find_map(|(i, s)| match s {
        Summand::Cyclic {
            p,
            mult: Multiplicity::Omega,
            ..
        }
        | Summand::Prufer {
            p,
            mult: Multiplicity::Omega,
        }
        | Summand::Tail { p, .. } => Some((i, *p)),
        _ => None,
    })
}

fn summand_label(s: &Summand) -> String {
    match s {
        Summand::Cyclic { p, k, mult } => format!("Z_{}^({mult})", p.pow(*k)),
        Summand::Prufer { p, mult } => format!("Z({p}^inf)^({mult})"),
        Summand::Tail { p, h } => format!("(+)_n Z_{p}^({h})"),
    }
}

/// The criterion for torsion groups with `Γ = {tor}`.
pub fn torsion_criterion(g: &TorsionGroup) -> ExtensionVerdict {
    match infinite_socle(g) {
        Some((i, p)) => ExtensionVerdict::Yes {
            witness: ChoiceFunction(vec![(p - 1) as usize]),
            bound: Some(p),
            family: format!(
                "the elements of order {p} in the components of summand {i}, {}",
                summand_label(&g.summands[i])
            ),
        },
        None => ExtensionVerdict::No {
            certificates: g
                .summands
                .iter()
                .map(|s| match s {
                    Summand::Cyclic { .. } => format!("{} is finite", summand_label(s)),
                    Summand::Prufer { p, mult } => format!(
                        "in {}, the elements of order dividing n form a finite group of order {p}^({mult}*v_{p}(n))",
                        summand_label(s)
                    ),
                    Summand::Tail { .. } => unreachable!("tails have infinite socles"),
                })
                .collect(),
        },
    }
}

fn naturals_context(gamma: &[UnaryTypePresentation]) -> Result<GammaContext, UltraError> {
    GammaContext::allowing_realizations(
        Family::ConstantPower(StructureHandle::Naturals(NatModel)),
        UltrafilterDescriptor::Frechet,
        gamma.to_vec(),
    )
}

/// `X_C` along the identity sequence, for every choice function within the
/// truncation depth.
fn naturals_omission_sets(ctx: &GammaContext) -> Result<Vec<(ChoiceFunction, SatSet)>, UltraError> {
    let identity = DefinableSequence::affine(1, 0);
    ChoiceFunction::enumerate(&ctx.gamma)
        .into_iter()
        .map(|c| {
            let phi = c.omission_formula(&ctx.gamma, "x");
            let set = sat_set(ctx, &phi, "x", &identity)?;
            Ok((c, set))
        })
        .collect()
}

/// Does `M` admit an infinite set `X` and a choice function `C` with every
/// element of `X` satisfying the negations `C` selects?
pub fn proper_extension_criterion(
    m: &StructureHandle,
    gamma: &[UnaryTypePresentation],
) -> Result<ExtensionVerdict, UltraError> {
    match m {
        StructureHandle::Finite(_) => Ok(ExtensionVerdict::No {
            certificates: vec!["a finite structure has no infinite subset".into()],
        }),
        StructureHandle::Torsion(g) if is_tor_only(gamma) => Ok(torsion_criterion(g)),
        StructureHandle::Torsion(_) => Ok(ExtensionVerdict::Undecided {
            reason: "torsion groups are decided for Γ = {tor} only".into(),
        }),
        StructureHandle::Naturals(_) => {
            let ctx = naturals_context(gamma)?;
            let sets = naturals_omission_sets(&ctx)?;
            if let Some((c, set)) = sets
                .iter()
                .find(|(_, s)| matches!(s, SatSet::Cofinite { .. } | SatSet::Periodic { .. }))
            {
                return Ok(ExtensionVerdict::Yes {
                    witness: c.clone(),
                    bound: None,
                    family: format!("X = {set}"),
                });
            }
            if let Some((c, set)) = sets.iter().find(|(_, s)| matches!(s, SatSet::Unknown { .. })) {
                return Ok(ExtensionVerdict::Undecided {
                    reason: format!("choice {c}: {set}"),
                });
            }
            Ok(ExtensionVerdict::No {
                certificates: sets.iter().map(|(c, s)| format!("choice {c}: X = {s}")).collect(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CollapseVerdict {
    /// Every member is U-equal to a constant.
    Collapses { reason: String },
    /// A member U-equal to no constant.
    ProperExtension {
        example: String,
        witness: ChoiceFunction,
        #[serde(skip)]
        sequence: DefinableSequence,
    },
    Undecided { reason: String },
}

impl CollapseVerdict {
    pub fn collapses(&self) -> bool {
        matches!(self, CollapseVerdict::Collapses { .. })
    }
}

/// Is the Γ-ultrapower over the Frechet filter just `M` again?
pub fn ultrapower_collapse_check(ctx: &GammaContext) -> Result<CollapseVerdict, UltraError> {
    let (Family::ConstantPower(m), UltrafilterDescriptor::Frechet) = (&ctx.family, ctx.ultrafilter) else {
        return Err(UltraError::Context("collapse is checked for ultrapowers over omega".into()));
    };
    let proper = |f: DefinableSequence| -> Result<CollapseVerdict, UltraError> {
        match membership_check(ctx, &f)? {
            MembershipVerdict::Member { witness, .. } => Ok(CollapseVerdict::ProperExtension {
                example: f.to_string(),
                witness,
                sequence: f,
            }),
            other => Ok(CollapseVerdict::Undecided {
                reason: format!("the candidate {f} is not a verified member: {other:?}"),
            }),
        }
    };
    match m {
        StructureHandle::Finite(_) => Ok(CollapseVerdict::Collapses {
            reason: "a sequence in a finite structure is constant on a U-large set".into(),
        }),
        StructureHandle::Torsion(g) => match torsion_criterion(g) {
            ExtensionVerdict::Yes { .. } if is_tor_only(&ctx.gamma) => {
                let (s, _) = infinite_socle(g).expect("criterion holds");
                proper(DefinableSequence::tail_unit(s, Affine { a: 0, b: 1 }, 1))
            }
            ExtensionVerdict::No { certificates } if is_tor_only(&ctx.gamma) => Ok(CollapseVerdict::Collapses {
                reason: certificates.join("; "),
            }),
            _ => Ok(CollapseVerdict::Undecided {
                reason: "torsion groups are decided for Γ = {tor} only".into(),
            }),
        },
        StructureHandle::Naturals(_) => {
            let sets = naturals_omission_sets(ctx)?;
            for (_, set) in &sets {
                match set {
                    SatSet::Finite { .. } => {}
                    SatSet::Cofinite { missing } => {
                        let from = missing.iter().next_back().map_or(0, |m| m + 1);
                        return proper(DefinableSequence::affine(1, from as i64));
                    }
                    SatSet::Periodic { start, pattern, .. } => {
                        let r = pattern.iter().position(|&b| b).expect("periodic sets are infinite");
                        return proper(DefinableSequence::affine(pattern.len() as i64, (start + r as u64) as i64));
                    }
                    SatSet::Unknown { reason } => return Ok(CollapseVerdict::Undecided { reason: reason.clone() }),
                }
            }
            Ok(CollapseVerdict::Collapses {
                reason: format!(
                    "every witness set is finite: {}",
                    sets.iter().map(|(c, s)| format!("{c} -> {s}")).collect::<Vec<_>>().join(", ")
                ),
            })
        }
    }
}
