//! Membership in the Γ-ultraproduct, pointwise closure and U-equality.

use std::collections::BTreeMap;

use serde::Serialize;

use super::context::{Family, GammaContext};
use super::decide::sat_set;
use super::filter::{Largeness, SatSet, UltrafilterDescriptor};
use super::sequence::{apply_op, combine_tails, map_tail, DefinableSequence};
use super::UltraError;
use crate::formula::{negate, parse_formula, ChoiceFunction};
use crate::structures::StructureHandle;

/// The satisfaction set of `~phi^p_j` along a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub type_name: String,
    pub index: usize,
    pub set: SatSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MembershipVerdict {
    /// `witness` picks, per type, a formula whose negation holds on
    /// `large_set`, which the ultrafilter contains.
    Member { witness: ChoiceFunction, large_set: SatSet },
    /// Every formula of `type_name` within `depth` fails on a set outside
    /// the ultrafilter; `certificates` lists those sets.
    NotMember {
        type_name: String,
        depth: usize,
        certificates: Vec<Certificate>,
        /// The certificate sets form a strictly increasing chain, the
        /// pattern of a sequence escaping every formula of the type.
        conclusive_for_all_depths: bool,
    },
    Undecided { reason: String },
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipVerdict::Member { .. })
    }

    pub fn is_not_member(&self) -> bool {
        matches!(self, MembershipVerdict::NotMember { .. })
    }
}

/// Search for a witness: per type in presentation order, the first formula
/// index whose negation holds on a U-large set along `f`.
pub fn membership_check(ctx: &GammaContext, f: &DefinableSequence) -> Result<MembershipVerdict, UltraError> {
    ctx.check_sequence(f)?;
    let mut witness = Vec::with_capacity(ctx.gamma.len());
    let mut large: Option<SatSet> = None;
    let mut undecided: Option<String> = None;
    for p in &ctx.gamma {
        let mut certificates = Vec::new();
        let mut found = None;
        let mut open = Vec::new();
        for j in 0..p.depth {
            let phi = p
                .formula(j)
                .ok_or_else(|| UltraError::Context(format!("`{}` has no formula {j}", p.name)))?;
            let set = sat_set(ctx, &negate(&phi), &p.var, f)?;
            match ctx.ultrafilter.decide(&set) {
                Largeness::Large => {
                    found = Some((j, set));
                    break;
                }
                Largeness::Small => certificates.push(Certificate {
                    type_name: p.name.clone(),
                    index: j,
                    set,
                }),
                Largeness::Undecided => open.push(format!("formula {j}: {set}")),
            }
        }
        match found {
            Some((j, set)) => {
                witness.push(j);
                large = Some(match large {
                    None => set,
                    Some(l) => l.intersect(&set),
                });
            }
            None if open.is_empty() => {
                let conclusive_for_all_depths = increasing_chain(&certificates);
                return Ok(MembershipVerdict::NotMember {
                    type_name: p.name.clone(),
                    depth: p.depth,
                    certificates,
                    conclusive_for_all_depths,
                });
            }
            None => {
                undecided.get_or_insert_with(|| format!("type `{}`: {}", p.name, open.join("; ")));
            }
        }
    }
    if let Some(reason) = undecided {
        return Ok(MembershipVerdict::Undecided { reason });
    }
    let large_set = large.unwrap_or_else(|| match ctx.family.size() {
        Some(n) => SatSet::finite(0..n as u64),
        None => SatSet::cofinite([]),
    });
    Ok(MembershipVerdict::Member {
        witness: ChoiceFunction(witness),
        large_set,
    })
}

fn increasing_chain(certificates: &[Certificate]) -> bool {
    certificates.len() >= 2
        && certificates.windows(2).all(|w| match (&w[0].set, &w[1].set) {
            (SatSet::Finite { members: a }, SatSet::Finite { members: b }) => a.len() < b.len() && a.is_subset(b),
            _ => false,
        })
}

/// The structure in which tails of a family are combined.
fn tail_member(ctx: &GammaContext) -> Option<&StructureHandle> {
    match &ctx.family {
        Family::Finite(_) => None,
        Family::ConstantPower(m) => Some(m),
        Family::TailPower { group, .. } => Some(group),
    }
}

/// The pointwise image `op(args)` as a sequence, when expressible.
pub fn pointwise(
    ctx: &GammaContext,
    op: &str,
    args: &[&DefinableSequence],
) -> Result<Option<DefinableSequence>, UltraError> {
    let values_at = |n: u64| -> Result<_, UltraError> {
        let m = ctx.family.member(n)?;
        let vals = args.iter().map(|f| f.at(n, m)).collect::<Result<Vec<_>, _>>()?;
        apply_op(m, op, &vals)
    };
    if let Some(size) = ctx.family.size() {
        let values = (0..size as u64).map(values_at).collect::<Result<Vec<_>, _>>()?;
        return Ok(Some(DefinableSequence::listed(values)));
    }
    let member = tail_member(ctx).expect("omega-indexed family");
    let combined = match args {
        [f] => map_tail(op, &f.canonical().tail, member).map(|t| (t, 0)),
        [f, g] => combine_tails(op, &f.canonical().tail, &g.canonical().tail, member),
        _ => None,
    };
    let Some((tail, valid_from)) = combined else { return Ok(None) };
    let start = args
        .iter()
        .map(|f| f.canonical().regular_from())
        .max()
        .unwrap_or(0)
        .max(valid_from);
    let exceptions = (0..start)
        .map(|n| Ok((n, values_at(n)?)))
        .collect::<Result<BTreeMap<_, _>, UltraError>>()?;
    Ok(Some(DefinableSequence { exceptions, tail }))
}

/// Membership of the pointwise image `op(f, g)`.
///
/// When the closed-form algebra cannot express the image and the only
/// presented type is `tor` over a torsion family, the closure scheme
/// `g_+(r, s) = r*s` is applied instead: if `r*f = 0` and `s*g = 0` on large
/// sets, then `r*s*(f + g) = 0` on their intersection.
pub fn gup_sum_check(
    ctx: &GammaContext,
    op: &str,
    f: &DefinableSequence,
    g: &DefinableSequence,
) -> Result<MembershipVerdict, UltraError> {
    if let Some(h) = pointwise(ctx, op, &[f, g])? {
        return membership_check(ctx, &h);
    }
    let torsion_family = matches!(
        ctx.family,
        Family::ConstantPower(StructureHandle::Torsion(_)) | Family::TailPower { .. }
    );
    if op == "+" && torsion_family && ctx.gamma.len() == 1 && ctx.gamma[0].is_tor() {
        let (vf, vg) = (membership_check(ctx, f)?, membership_check(ctx, g)?);
        if let (
            MembershipVerdict::Member {
                witness: wf,
                large_set: lf,
            },
            MembershipVerdict::Member {
                witness: wg,
                large_set: lg,
            },
        ) = (vf, vg)
        {
            let order = (wf.0[0] + 1) * (wg.0[0] + 1);
            return Ok(MembershipVerdict::Member {
                witness: ChoiceFunction(vec![order - 1]),
                large_set: lf.intersect(&lg),
            });
        }
    }
    Ok(MembershipVerdict::Undecided {
        reason: format!("the pointwise image under `{op}` has no closed form"),
    })
}

/// Whether `{n : f(n) = g(n)}` belongs to the ultrafilter.
pub fn u_equal(ctx: &GammaContext, f: &DefinableSequence, g: &DefinableSequence) -> Result<Largeness, UltraError> {
    ctx.check_sequence(f)?;
    ctx.check_sequence(g)?;
    if let UltrafilterDescriptor::Principal { atom, .. } = ctx.ultrafilter {
        let m = ctx.family.member(atom as u64)?;
        let same = f.at(atom as u64, m)? == g.at(atom as u64, m)?;
        return Ok(if same { Largeness::Large } else { Largeness::Small });
    }
    let member = tail_member(ctx).expect("omega-indexed family");
    match member {
        // Distinct canonical closed forms over the naturals (or over a
        // finite structure, where tails are constants) agree at finitely
        // many indices.
        StructureHandle::Naturals(_) | StructureHandle::Finite(_) => {
            let same = f.canonical().tail == g.canonical().tail;
            Ok(if same { Largeness::Large } else { Largeness::Small })
        }
        StructureHandle::Torsion(group) => {
            let sig = member.signature();
            if let Some(neg) = pointwise(ctx, "-", &[g])? {
                if let Some(diff) = pointwise(ctx, "+", &[f, &neg])? {
                    let zero = parse_formula("x = 0", &sig)?;
                    return Ok(ctx.ultrafilter.decide(&sat_set(ctx, &zero, "x", &diff)?));
                }
            }
            // No closed form for the difference: look for a separating
            // property among small annihilators and divisibility by prime
            // powers of the summands.
            let mut primes: Vec<u64> = group.summands.iter().map(|s| s.prime()).collect();
            primes.sort_unstable();
            primes.dedup();
            let mut probes: Vec<String> = (1..=SEPARATION_PROBES).map(|m| format!("{m}*x = 0")).collect();
            for p in primes {
                probes.extend((1..=SEPARATION_PROBES.ilog2()).map(|e| format!("{p}^{e} | x")));
            }
            for probe in probes {
                let phi = parse_formula(&probe, &sig)?;
                let a = ctx.ultrafilter.decide(&sat_set(ctx, &phi, "x", f)?);
                let b = ctx.ultrafilter.decide(&sat_set(ctx, &phi, "x", g)?);
                if matches!((a, b), (Largeness::Large, Largeness::Small) | (Largeness::Small, Largeness::Large)) {
                    return Ok(Largeness::Small);
                }
            }
            Ok(Largeness::Undecided)
        }
    }
}

/// Number of annihilator probes tried when separating torsion sequences.
const SEPARATION_PROBES: u32 = 64;
