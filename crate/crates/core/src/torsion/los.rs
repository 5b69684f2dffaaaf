//! Łoś verification for the tor-ultraproduct of finite abelian groups.
//!
//! Members are realized as finite structures, `Γ = {tor}` is truncated at
//! the largest group exponent (so every element omits it and the hull is
//! the whole atom), and formulas are split: invariants sentences are
//! compared through the invariants on both sides, everything else goes
//! through the general finite verifier.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use super::TorsionError;
use crate::formula::{Formula, InvCondition, UnaryTypePresentation};
use crate::structures::{compute_inv_finite, compute_inv_presentation, Multiplicity, StructureHandle, Summand, TorsionGroup};
use crate::ultraproduct::{verify_los_finite, Family, GammaContext, Sampling, TransferReport, UltrafilterDescriptor};

/// Largest member realized as a finite structure.
const REALIZATION_LIMIT: usize = 4096;

/// One invariants sentence: truth in each member (from the presentation),
/// whether the truth set is U-large, and truth in the product (computed on
/// the realized hull).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantsTransfer {
    pub sentence: String,
    pub member_truth: Vec<bool>,
    pub large: bool,
    pub product_truth: bool,
}

impl InvariantsTransfer {
    pub fn agrees(&self) -> bool {
        self.large == self.product_truth
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorLosReport {
    /// The finite stand-in used for the elementary-equivalence hypothesis.
    pub surrogate: String,
    /// Whether the members are pairwise isomorphic.
    pub isomorphic: bool,
    /// Truncation depth of the torsion type.
    pub tor_depth: usize,
    pub transfer: TransferReport,
    pub invariants: Vec<InvariantsTransfer>,
}

impl TorLosReport {
    /// Every sampled instance transferred in both directions.
    pub fn holds(&self) -> bool {
        self.transfer.collapse.holds()
            && self
                .transfer
                .formulas
                .iter()
                .all(|f| f.lr_failures == 0 && f.rl_failures == 0)
            && self.invariants.iter().all(InvariantsTransfer::agrees)
    }
}

/// The multiset of cyclic factors `Z_{p^k}` of a finite presentation.
fn factors(g: &TorsionGroup) -> Option<BTreeMap<(u64, u32), u64>> {
    let mut out = BTreeMap::new();
    for s in &g.summands {
        match s {
            Summand::Cyclic {
                k: 0,
                mult: Multiplicity::Finite(_),
                ..
            } => {}
            Summand::Cyclic {
                p,
                k,
                mult: Multiplicity::Finite(m),
            } => *out.entry((*p, *k)).or_insert(0) += *m,
            _ => return None,
        }
    }
    out.retain(|_, m| *m > 0);
    Some(out)
}

/// Isomorphism of finite presentations: equal multisets of primary cyclic
/// factors. `None` when either presentation is infinite.
pub fn is_isomorphic(g: &TorsionGroup, h: &TorsionGroup) -> Option<bool> {
    Some(factors(g)? == factors(h)?)
}

fn exponent(g: &TorsionGroup) -> Option<u64> {
    factors(g)?
        .keys()
        .try_fold(1u64, |acc, &(p, k)| Some(num_integer::lcm(acc, p.checked_pow(k)?)))
}

/// Verify Łoś transfer for p.p. formulas, their boolean combinations and
/// invariants sentences over a finite family of finite abelian groups
/// under the principal ultrafilter at `atom`.
pub fn tor_los_pp_verify(
    family: &[TorsionGroup],
    atom: usize,
    formulas: &[Formula],
    sampling: Sampling,
) -> Result<TorLosReport, TorsionError> {
    if family.is_empty() {
        return Err(TorsionError::Unsupported("the family is empty".into()));
    }
    let mut members = Vec::new();
    let mut tor_depth = 1;
    for g in family {
        let e = exponent(g).ok_or_else(|| TorsionError::Unsupported("members must be finite groups".into()))?;
        tor_depth = tor_depth.max(e as usize);
        let (m, _) = g.realize_finite(REALIZATION_LIMIT)?;
        members.push(StructureHandle::Finite(m));
    }
    let isomorphic = family.iter().all(|g| is_isomorphic(g, &family[0]) == Some(true));
    let ctx = GammaContext::new(
        Family::Finite(members.clone()),
        UltrafilterDescriptor::Principal {
            size: family.len(),
            atom,
        },
        vec![UnaryTypePresentation::tor(tor_depth)],
    )?;
    let (sentences, others): (Vec<_>, Vec<_>) = formulas
        .iter()
        .cloned()
        .partition(|f| InvCondition::from_formula(f).is_some());
    let transfer = verify_los_finite(&ctx, &others, sampling)?;
    let StructureHandle::Finite(hull_structure) = &members[atom] else {
        unreachable!("realized members")
    };
    let mut invariants = Vec::new();
    for f in &sentences {
        let cond = InvCondition::from_formula(f).expect("partitioned");
        let k = BigUint::from(cond.k.max(1));
        let truth = |v: crate::structures::InvariantValue| v.at_least(&k) == cond.at_least;
        let member_truth = family
            .iter()
            .map(|g| Ok(truth(compute_inv_presentation(g, &cond.phi, &cond.psi, &k)?)))
            .collect::<Result<Vec<bool>, TorsionError>>()?;
        let product_truth = truth(compute_inv_finite(hull_structure, &cond.phi, &cond.psi, &k)?);
        invariants.push(InvariantsTransfer {
            sentence: cond.to_string(),
            large: member_truth[atom],
            member_truth,
            product_truth,
        });
    }
    Ok(TorLosReport {
        surrogate: "pairwise isomorphic finite groups".into(),
        isomorphic,
        tor_depth,
        transfer,
        invariants,
    })
}
