//! Membership and divisibility in the tor-ultraproduct over omega.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::Serialize;

use super::TorsionError;
use crate::arith::pow;
use crate::formula::{parse_formula, Signature};
use crate::structures::{order_exponent, Affine, StructureHandle, TorsionElement, TorsionGroup, Value};
use crate::ultraproduct::{sat_set, DefinableSequence, Family, GammaContext, Largeness, SatSet, Tail, UltrafilterDescriptor};

/// Indices beyond the exceptional region at which witnesses are re-checked.
pub const WITNESS_SAMPLES: u64 = 64;

/// `r * f(i) = 0` for every `i` in `large_set`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorMembership {
    pub order: BigUint,
    pub large_set: SatSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TorVerdict {
    Member(TorMembership),
    /// Every candidate order annihilates the sequence on a finite set only.
    NotMember { candidates: Vec<(BigUint, SatSet)> },
    Undecided { reason: String },
}

impl TorVerdict {
    pub fn member(&self) -> Option<&TorMembership> {
        match self {
            TorVerdict::Member(m) => Some(m),
            _ => None,
        }
    }
}

fn torsion_group(ctx: &GammaContext) -> Result<&TorsionGroup, TorsionError> {
    match (&ctx.family, ctx.ultrafilter) {
        (
            Family::ConstantPower(StructureHandle::Torsion(g))
            | Family::TailPower {
                group: StructureHandle::Torsion(g),
                ..
            },
            UltrafilterDescriptor::Frechet,
        ) => Ok(g),
        _ => Err(TorsionError::Unsupported(
            "tor-ultraproducts are computed for torsion families over omega".into(),
        )),
    }
}

/// Candidate orders: for a constant tail its order; for a unit tail at the
/// prime `p`, the powers `p^j` up to one past the larger of the offset
/// intercept and the exceptional values' exponents.
fn candidate_orders(g: &TorsionGroup, f: &DefinableSequence) -> Result<Vec<BigUint>, String> {
    match &f.tail {
        Tail::Const(Value::Tor(v)) => Ok(vec![g.order_of(v)]),
        Tail::TailUnit { summand, offset, .. } => {
            let p = g.summands.get(*summand).ok_or("no such summand")?.prime();
            let exceptional = f
                .exceptions
                .values()
                .filter_map(|v| match v {
                    Value::Tor(t) => order_exponent(&g.order_of(t), p),
                    _ => None,
                })
                .max()
                .unwrap_or(0);
            let top = u32::try_from(offset.b.max(0)).map_err(|_| "offset too large")?.max(exceptional) + 1;
            Ok((0..=top).map(|j| pow(p, j)).collect())
        }
        t => Err(format!("no order candidates for the tail `{t}`")),
    }
}

/// Search for a uniform order `r` with `r * f(i) = 0` on a cofinite set.
pub fn tor_membership(ctx: &GammaContext, f: &DefinableSequence) -> Result<TorVerdict, TorsionError> {
    let g = torsion_group(ctx)?;
    ctx.check_sequence(f)?;
    let f = f.canonical();
    let candidates = match candidate_orders(g, &f) {
        Ok(c) => c,
        Err(reason) => return Ok(TorVerdict::Undecided { reason }),
    };
    let sig = Signature::module();
    let mut small = Vec::new();
    let mut open = None;
    for r in candidates {
        let phi = parse_formula(&format!("{r}*x = 0"), &sig)?;
        let set = sat_set(ctx, &phi, "x", &f)?;
        match ctx.ultrafilter.decide(&set) {
            Largeness::Large => return Ok(TorVerdict::Member(TorMembership { order: r, large_set: set })),
            Largeness::Small => small.push((r, set)),
            Largeness::Undecided => {
                open.get_or_insert(format!("order {r}: {set}"));
            }
        }
    }
    Ok(match open {
        Some(reason) => TorVerdict::Undecided { reason },
        None => TorVerdict::NotMember { candidates: small },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DivisibilityVerdict {
    /// `p^k | f(i)` on `large_set`; `witness` satisfies `p^k * witness = f`
    /// there and has the uniform order `witness_order`.
    Holds {
        large_set: SatSet,
        witness: String,
        #[serde(skip)]
        witness_sequence: DefinableSequence,
        witness_order: BigUint,
        /// The order of `f` times `p^k`: the order propagated through
        /// `p^k * y = f`.
        expected_order: BigUint,
        /// Indices at which `p^k * witness(i) = f(i)` was re-checked.
        checked_indices: u64,
    },
    Fails { set: SatSet },
    Undecided { reason: String },
}

impl DivisibilityVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, DivisibilityVerdict::Holds { .. })
    }
}

/// Whether `p^k` divides `f` in the tor-ultraproduct, with a witness
/// sequence built from the closed form of `f`.
pub fn tor_divisibility(
    ctx: &GammaContext,
    f: &DefinableSequence,
    p: u64,
    k: u32,
) -> Result<DivisibilityVerdict, TorsionError> {
    let g = torsion_group(ctx)?;
    let membership = match tor_membership(ctx, f)? {
        TorVerdict::Member(m) => m,
        other => {
            return Ok(DivisibilityVerdict::Undecided {
                reason: format!("not a verified member: {other:?}"),
            })
        }
    };
    let f = f.canonical();
    let phi = parse_formula(&format!("{p}^{k} | x"), &Signature::module())?;
    let set = sat_set(ctx, &phi, "x", &f)?;
    match ctx.ultrafilter.decide(&set) {
        Largeness::Small => return Ok(DivisibilityVerdict::Fails { set }),
        Largeness::Undecided => {
            return Ok(DivisibilityVerdict::Undecided {
                reason: format!("divisibility set {set}"),
            })
        }
        Largeness::Large => {}
    }
    let tail = match &f.tail {
        Tail::Const(Value::Tor(v)) => match g.divide(v, p, k) {
            Some(y) => Tail::Const(Value::Tor(y)),
            None => unreachable!("a constant divisible on a large set is divisible"),
        },
        Tail::TailUnit {
            summand,
            offset,
            coefficient,
        } => Tail::TailUnit {
            summand: *summand,
            offset: Affine {
                a: offset.a,
                b: offset.b + k as i64,
            },
            coefficient: coefficient.clone(),
        },
        t => {
            return Ok(DivisibilityVerdict::Undecided {
                reason: format!("no witness construction for the tail `{t}`"),
            })
        }
    };
    let mut witness = DefinableSequence::new(tail);
    for (n, v) in &f.exceptions {
        let Value::Tor(t) = v else { unreachable!("checked sequence") };
        let y = g.divide(t, p, k).unwrap_or_else(TorsionElement::zero);
        witness = witness.with_exception(*n, Value::Tor(y));
    }
    ctx.check_sequence(&witness)?;
    // Re-check p^k * witness = f on sampled indices of the large set.
    let scalar = BigInt::from(pow(p, k));
    let start = f.regular_from();
    let mut checked = 0;
    for n in start..start + WITNESS_SAMPLES {
        if set.contains(n) != Some(true) {
            continue;
        }
        let m = ctx.family.member(n)?;
        let (Value::Tor(y), Value::Tor(x)) = (witness.at(n, m)?, f.at(n, m)?) else {
            unreachable!("torsion values")
        };
        if g.scale(&y, &scalar) != x {
            return Err(TorsionError::Unsupported(format!(
                "witness construction failed at index {n}"
            )));
        }
        checked += 1;
    }
    let witness_order = match tor_membership(ctx, &witness)? {
        TorVerdict::Member(m) => m.order,
        other => {
            return Ok(DivisibilityVerdict::Undecided {
                reason: format!("the witness has no verified order: {other:?}"),
            })
        }
    };
    let expected_order = if membership.order.is_one() {
        BigUint::one()
    } else {
        membership.order * pow(p, k)
    };
    Ok(DivisibilityVerdict::Holds {
        large_set: set,
        witness: witness.to_string(),
        witness_sequence: witness,
        witness_order,
        expected_order,
        checked_indices: checked,
    })
}
