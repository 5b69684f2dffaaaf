//! Elementary-equivalence testing through capped invariants.

use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{first_primes, pow};
use crate::formula::{UnaryCond, UnaryPP};
use crate::structures::{compute_inv_presentation, EvalError, TorsionGroup};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EeVerdict {
    /// `min(Inv, cap)` agrees on every pair of the family at this bound.
    Equivalent { bound: u32, cap: u64, pairs: usize },
    /// The first pair (in enumeration order) on which the capped values differ.
    Distinguished {
        phi: String,
        psi: String,
        values: (BigUint, BigUint),
    },
}

impl EeVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EeVerdict::Equivalent { .. })
    }
}

/// The single-variable p.p. formulas of the bound-`b` family: divisibility
/// `p^n | c*x` for the first `b` primes, `1 <= n <= b` and `1 <= c <= p^b`;
/// then annihilation `c*x = 0` for `1 <= c <= max p^b`; then `x = x`.
/// Syntactic duplicates (after canonicalization) are dropped.
pub fn pp_family(b: u32) -> Vec<UnaryPP> {
    let primes = first_primes(b as usize);
    let mut out: Vec<UnaryPP> = Vec::new();
    let push = |pp: UnaryPP, out: &mut Vec<UnaryPP>| {
        if !out.contains(&pp) {
            out.push(pp);
        }
    };
    for &p in &primes {
        let top = pow(p, b);
        for n in 1..=b {
            let mut c = BigUint::from(1u32);
            while c <= top {
                let cond = UnaryCond::Div {
                    prime: p,
                    exp: n,
                    coeff: BigInt::from(c.clone()),
                };
                push(UnaryPP::new(vec![cond]), &mut out);
                c += 1u32;
            }
        }
    }
    let ann_top = primes.iter().map(|&p| pow(p, b)).max().unwrap_or_default();
    let mut c = BigUint::from(1u32);
    while c <= ann_top {
        push(
            UnaryPP::new(vec![UnaryCond::Ann {
                coeff: BigInt::from(c.clone()),
            }]),
            &mut out,
        );
        c += 1u32;
    }
    push(UnaryPP::trivial(), &mut out);
    out
}

/// Compare `min(Inv(-, phi, psi), cap)` on `g` and `h` for every pair of
/// the bound-`b` family. `phi` runs over the family in order; `psi` runs
/// over `x = x`, then annihilators, then divisibility conditions, so the
/// simplest distinguishing pair is reported first.
pub fn ee_invariants_check(g: &TorsionGroup, h: &TorsionGroup, b: u32, cap: u64) -> Result<EeVerdict, EvalError> {
    if b == 0 || cap == 0 {
        return Err(EvalError::Unsupported("the bound and the cap must be at least 1".into()));
    }
    g.validate()?;
    h.validate()?;
    let family = pp_family(b);
    let mut psis = family.clone();
    psis.sort_by_key(|pp| match pp.conds.first() {
        None => 0,
        Some(UnaryCond::Ann { .. }) => 1,
        Some(UnaryCond::Div { .. }) => 2,
    });
    let pairs: Vec<(&UnaryPP, &UnaryPP)> = family.iter().flat_map(|phi| psis.iter().map(move |psi| (phi, psi))).collect();
    let cap_big = BigUint::from(cap);
    let found = pairs
        .par_iter()
        .map(|(phi, psi)| -> Result<Option<EeVerdict>, EvalError> {
            let a = compute_inv_presentation(g, phi, psi, &cap_big)?.capped(&cap_big);
            let b = compute_inv_presentation(h, phi, psi, &cap_big)?.capped(&cap_big);
            Ok((a != b).then(|| EeVerdict::Distinguished {
                phi: phi.to_formula("x").to_string(),
                psi: psi.to_formula("x").to_string(),
                values: (a, b),
            }))
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    match found {
        Some(r) => Ok(r?.expect("only differences are kept")),
        None => Ok(EeVerdict::Equivalent {
            bound: b,
            cap,
            pairs: pairs.len(),
        }),
    }
}
