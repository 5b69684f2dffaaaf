//! The invariants `Inv(M, phi, psi) = |phi(M) / (phi(M) /\ psi(M))|`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::finite::FiniteStructure;
use super::torsion::{Component, Multiplicity, Summand, TorsionGroup};
use super::EvalError;
use crate::arith::{pow, valuation};
use crate::formula::{InvCondition, UnaryCond, UnaryPP};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum InvariantValue {
    Finite(BigUint),
    /// At least the cap; only produced by capped computations.
    AtLeast(BigUint),
    Infinite,
}

impl InvariantValue {
    /// Whether the value is known to be `>= k`.
    pub fn at_least(&self, k: &BigUint) -> bool {
        match self {
            InvariantValue::Finite(v) | InvariantValue::AtLeast(v) => v >= k,
            InvariantValue::Infinite => true,
        }
    }

    /// `min(value, k)`, exact whenever the value was computed with cap `>= k`.
    pub fn capped(&self, k: &BigUint) -> BigUint {
        match self {
            InvariantValue::Finite(v) | InvariantValue::AtLeast(v) => v.min(k).clone(),
            InvariantValue::Infinite => k.clone(),
        }
    }

    fn from_count(v: BigUint, cap: &BigUint) -> Self {
        if &v >= cap {
            InvariantValue::AtLeast(cap.clone())
        } else {
            InvariantValue::Finite(v)
        }
    }
}

impl fmt::Display for InvariantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantValue::Finite(v) => write!(f, "{v}"),
            InvariantValue::AtLeast(v) => write!(f, ">={v}"),
            InvariantValue::Infinite => write!(f, "infinite"),
        }
    }
}

/// The size of `phi(C)` for a basic component `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sub {
    /// In `Z_{p^k}`: the subgroup `p^a Z_{p^k}`.
    Cyclic { a: u32 },
    /// In `Z(p^inf)`: the elements of order dividing `p^s` (`None`: everything).
    Prufer { s: Option<u32> },
}

fn subgroup(pp: &UnaryPP, c: Component) -> Sub {
    match c {
        Component::Cyclic { p, k } => {
            let a = pp
                .conds
                .iter()
                .map(|cond| match cond {
                    UnaryCond::Ann { coeff } => k.saturating_sub(valuation(coeff, p).unwrap_or(0)),
                    UnaryCond::Div { prime, exp, coeff } if *prime == p => {
                        (*exp).min(k).saturating_sub(valuation(coeff, p).unwrap_or(0))
                    }
                    UnaryCond::Div { .. } => 0,
                })
                .max()
                .unwrap_or(0);
            Sub::Cyclic { a }
        }
        Component::Prufer { p } => {
            let s = pp
                .conds
                .iter()
                .filter_map(|cond| match cond {
                    UnaryCond::Ann { coeff } => Some(valuation(coeff, p).unwrap_or(0)),
                    UnaryCond::Div { .. } => None,
                })
                .min();
            Sub::Prufer { s }
        }
    }
}

/// `Inv(C, phi, psi)` for one basic component; `None` means infinite.
pub fn component_index(phi: &UnaryPP, psi: &UnaryPP, c: Component) -> Option<BigUint> {
    let p = c.prime();
    match (subgroup(phi, c), subgroup(&phi.and(psi), c)) {
        (Sub::Cyclic { a: af }, Sub::Cyclic { a: ab }) => Some(pow(p, ab - af)),
        (Sub::Prufer { s: None }, Sub::Prufer { s: None }) => Some(BigUint::one()),
        (Sub::Prufer { s: None }, Sub::Prufer { s: Some(_) }) => None,
        (Sub::Prufer { s: Some(sf) }, Sub::Prufer { s: sb }) => Some(pow(p, sf - sb.unwrap_or(sf).min(sf))),
        _ => unreachable!("same component"),
    }
}

/// Exponent beyond which the index over `Z_{p^h}` no longer depends on `h`.
pub fn tail_stabilization(phi: &UnaryPP, psi: &UnaryPP, p: u64) -> u32 {
    2 * phi.exponent_bound(p).max(psi.exponent_bound(p)) + 1
}

fn summand_index(phi: &UnaryPP, psi: &UnaryPP, s: &Summand, cap: &BigUint) -> Result<Option<BigUint>, EvalError> {
    let power = |idx: Option<BigUint>, mult: Multiplicity| -> Option<BigUint> {
        let idx = idx?;
        match mult {
            _ if idx.is_one() => Some(idx),
            Multiplicity::Omega => None,
            Multiplicity::Finite(m) => {
                let mut acc = BigUint::one();
                for _ in 0..m {
                    acc *= &idx;
                    if &acc >= cap {
                        break;
                    }
                }
                Some(acc)
            }
        }
    };
    match s {
        Summand::Cyclic { mult, .. } | Summand::Prufer { mult, .. } => {
            Ok(power(component_index(phi, psi, s.component(0)?), *mult))
        }
        Summand::Tail { p, h } => {
            let stable = tail_stabilization(phi, psi, *p);
            let limit = component_index(phi, psi, Component::Cyclic { p: *p, k: stable });
            if limit.as_ref().is_none_or(|v| !v.is_one()) {
                return Ok(None);
            }
            let mut acc = BigUint::one();
            let mut n = 0u64;
            while h.at(n) < stable as i128 {
                acc *= component_index(phi, psi, s.component(n)?).expect("cyclic components are finite");
                if &acc >= cap {
                    break;
                }
                n += 1;
            }
            Ok(Some(acc))
        }
    }
}

/// `Inv(G, phi, psi)` over a presentation, capped at `cap`.
pub fn compute_inv_presentation(
    g: &TorsionGroup,
    phi: &UnaryPP,
    psi: &UnaryPP,
    cap: &BigUint,
) -> Result<InvariantValue, EvalError> {
    g.validate()?;
    let mut total = BigUint::one();
    for s in &g.summands {
        match summand_index(phi, psi, s, cap)? {
            None => return Ok(InvariantValue::Infinite),
            Some(v) => total *= v,
        }
        if &total >= cap {
            return Ok(InvariantValue::AtLeast(cap.clone()));
        }
    }
    Ok(InvariantValue::from_count(total, cap))
}

/// `Inv(M, phi, psi)` over a finite group by enumerating the universe.
pub fn compute_inv_finite(
    m: &FiniteStructure,
    phi: &UnaryPP,
    psi: &UnaryPP,
    cap: &BigUint,
) -> Result<InvariantValue, EvalError> {
    let phi_set = m.satisfying(&phi.to_formula("x"), "x")?;
    let both = m.satisfying(&phi.and(psi).to_formula("x"), "x")?;
    if both.is_empty() || phi_set.len() % both.len() != 0 {
        return Err(EvalError::Structure("the structure is not a group".into()));
    }
    Ok(InvariantValue::from_count(BigUint::from(phi_set.len() / both.len()), cap))
}

/// Truth of an invariants condition, via `compute_inv` capped at `k`.
pub fn eval_invariants_sentence(
    inv: impl Fn(&UnaryPP, &UnaryPP, &BigUint) -> Result<InvariantValue, EvalError>,
    cond: &InvCondition,
) -> Result<bool, EvalError> {
    if cond.k == 0 {
        return Err(EvalError::Unsupported("invariants conditions need k >= 1".into()));
    }
    let k = BigUint::from(cond.k);
    let v = inv(&cond.phi, &cond.psi, &k)?;
    Ok(v.at_least(&k) == cond.at_least)
}
