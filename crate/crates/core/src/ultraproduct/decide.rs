//! Deciding `{n : M_n |= phi(f(n))}` for closed-form sequences.
//!
//! Each supported (family, descriptor) combination reduces the question to
//! finitely many concrete evaluations plus an eventually periodic pattern:
//!
//! * finite structures and constant tails: the truth value is constant on
//!   the tail;
//! * the naturals with affine or geometric tails and quantifier-free
//!   formulas: order atoms are constant past a root bound of the
//!   polynomials involved, and divisibility atoms only see the value modulo
//!   the lcm `M` of the divisors, which is eventually periodic in `n`;
//! * torsion groups with unit tails and boolean combinations of p.p.
//!   formulas: truth at an element `u*p^e` of `Z_{p^k}` depends only on
//!   `min(e, C)` and `min(k - e, C)` for a constant `C` read off the
//!   formula, and both quantities are eventually constant or at least `C`.
//!
//! Everything else is reported as unknown.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::context::{Family, GammaContext};
use super::filter::SatSet;
use super::sequence::{DefinableSequence, Tail};
use super::UltraError;
use crate::arith::valuation;
use crate::formula::{Atom, Formula, Term};
use crate::structures::{stabilization, EvalError, Multiplicity, StructureHandle, Summand, Value};

/// Largest number of indices evaluated concretely before giving up.
pub const EVALUATION_BUDGET: u64 = 200_000;

/// Truth of `phi(value)` in one structure. `Ok(None)` when the structure
/// cannot decide the formula.
pub fn holds(member: &StructureHandle, phi: &Formula, var: &str, value: &Value) -> Result<Option<bool>, UltraError> {
    let result = match (member, value) {
        (StructureHandle::Finite(m), Value::Elem(e)) => {
            let env = [(var.to_string(), *e)].into_iter().collect();
            m.eval(phi, &env)
        }
        (StructureHandle::Naturals(n), Value::Nat(v)) => {
            let env: HashMap<String, BigUint> = [(var.to_string(), v.clone())].into_iter().collect();
            n.eval_qf(phi, &env)
        }
        (StructureHandle::Torsion(g), Value::Tor(t)) => {
            let env = [(var.to_string(), t.clone())].into_iter().collect();
            g.eval_formula(phi, &env)
        }
        _ => return Err(UltraError::Sequence(format!("value {value} does not belong to the structure"))),
    };
    match result {
        Ok(b) => Ok(Some(b)),
        Err(EvalError::Unsupported(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// `{n : M_n |= phi(f(n))}`.
pub fn sat_set(ctx: &GammaContext, phi: &Formula, var: &str, f: &DefinableSequence) -> Result<SatSet, UltraError> {
    let truth = |n: u64| -> Result<Option<bool>, UltraError> {
        let m = ctx.family.member(n)?;
        holds(m, phi, var, &f.at(n, m)?)
    };
    if let Family::Finite(ms) = &ctx.family {
        let mut members = Vec::new();
        for n in 0..ms.len() as u64 {
            match truth(n)? {
                Some(true) => members.push(n),
                Some(false) => {}
                None => return Ok(SatSet::unknown("formula not decidable in a member")),
            }
        }
        return Ok(SatSet::finite(members));
    }
    let f = f.canonical();
    let plan = match (&f.tail, &ctx.family) {
        (Tail::Const(_), _) => Ok((f.regular_from(), 1)),
        (Tail::AffineNat { .. } | Tail::GeometricNat { .. }, Family::ConstantPower(StructureHandle::Naturals(_))) => {
            naturals_plan(phi, var, &f)
        }
        (Tail::TailUnit { .. }, Family::ConstantPower(StructureHandle::Torsion(_)) | Family::TailPower { .. }) => {
            torsion_plan(ctx, phi, &f)
        }
        _ => Err("no decision procedure for this sequence and family".to_string()),
    };
    let (start, period) = match plan {
        Ok(x) => x,
        Err(reason) => return Ok(SatSet::unknown(reason)),
    };
    if start.saturating_add(period) > EVALUATION_BUDGET {
        return Ok(SatSet::unknown(format!(
            "stabilization at index {start} with period {period} exceeds the evaluation budget"
        )));
    }
    let mut values = BTreeMap::new();
    for n in 0..start + period {
        match truth(n)? {
            Some(b) => {
                values.insert(n, b);
            }
            None => return Ok(SatSet::unknown("formula outside the decidable class")),
        }
    }
    let pattern = (start..start + period).map(|n| values[&n]).collect();
    Ok(SatSet::from_pattern(start, |n| values[&n], pattern))
}

/// Start and period of the eventual truth pattern for naturals tails.
fn naturals_plan(phi: &Formula, var: &str, f: &DefinableSequence) -> Result<(u64, u64), String> {
    let st = stabilization(phi, var).map_err(|e| e.to_string())?;
    let modulus = st.modulus;
    let threshold = BigInt::from(st.threshold);
    let from = f.regular_from();
    match &f.tail {
        Tail::AffineNat { a, b } => {
            // a > 0 after canonicalization.
            let needed = (&threshold - b).max(BigInt::zero());
            let n0 = needed.div_ceil(a).to_u64().ok_or("threshold too large")?.max(from);
            let period = modulus.to_u64().ok_or("modulus too large")?;
            Ok((n0, period))
        }
        Tail::GeometricNat { a, c, d } => {
            // a > 0 and c >= 2 after canonicalization.
            let mut n0 = from.max(1);
            loop {
                let v = a * BigInt::from(c.pow(n0 as u32)) + d;
                if v >= threshold {
                    break;
                }
                n0 += 1;
                if n0 > EVALUATION_BUDGET {
                    return Err("threshold too large".into());
                }
            }
            // c^n mod M is eventually periodic; detect the cycle from n0.
            let mut seen = HashMap::new();
            let mut state = c.modpow(&BigUint::from(n0), &modulus);
            let mut n = n0;
            loop {
                if let Some(&first) = seen.get(&state) {
                    return Ok((first, n - first));
                }
                seen.insert(state.clone(), n);
                state = (state * c) % &modulus;
                n += 1;
                if n - n0 > EVALUATION_BUDGET {
                    return Err("period too long".into());
                }
            }
        }
        _ => unreachable!("dispatched on naturals tails"),
    }
}

/// Start of the constant truth region for torsion unit tails (period 1).
fn torsion_plan(ctx: &GammaContext, phi: &Formula, f: &DefinableSequence) -> Result<(u64, u64), String> {
    let Tail::TailUnit {
        summand,
        offset,
        coefficient,
    } = &f.tail
    else {
        unreachable!("dispatched on unit tails")
    };
    let group = match &ctx.family {
        Family::ConstantPower(StructureHandle::Torsion(g)) | Family::TailPower {
            group: StructureHandle::Torsion(g),
            ..
        } => g,
        _ => unreachable!("dispatched on torsion families"),
    };
    let s = group.summands.get(*summand).ok_or("no such summand")?;
    let p = s.prime();
    // Intercept of the exponent form h(n) = a*n + b of the components
    // (constant for cyclic summands; Prufer components only see the offset).
    let bh = match s {
        Summand::Tail { h, .. } => h.b,
        Summand::Cyclic {
            k,
            mult: Multiplicity::Omega,
            ..
        } => *k as i64,
        Summand::Prufer {
            mult: Multiplicity::Omega,
            ..
        } => 0,
        _ => return Err("unit tails need infinitely many components".into()),
    };
    if offset.a < 0 {
        return Err("unit tail offsets must be non-decreasing".into());
    }
    let c = formula_bound(phi, p) as i64;
    let v = if coefficient.is_zero() {
        0
    } else {
        valuation(coefficient, p).unwrap_or(0) as i64
    };
    let bj = offset.b;
    let bound = c + v + bh.abs() + bj.abs() + (bh - bj).abs() + 2;
    let bound = u64::try_from(bound).map_err(|_| "bound out of range")?;
    Ok((bound.max(f.regular_from()), 1))
}

/// `1 +` the largest divisibility exponent `+` the sum of the `p`-adic
/// valuations of every scalar in the formula: no threshold the formula can
/// test on `p`-power valuations exceeds this.
pub fn formula_bound(phi: &Formula, p: u64) -> u32 {
    fn term_vals(t: &Term, p: u64) -> u32 {
        match t {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| term_vals(a, p)).sum(),
            Term::Scalar(k, t) => {
                let v = if k.is_zero() { 0 } else { valuation(&k.abs(), p).unwrap_or(0) };
                v + term_vals(t, p)
            }
        }
    }
    let mut max_exp = 0;
    let mut vals = 0;
    phi.visit_atoms(&mut |a| match a {
        Atom::Eq(s, t) => vals += term_vals(s, p) + term_vals(t, p),
        Atom::Rel(_, args) => vals += args.iter().map(|t| term_vals(t, p)).sum::<u32>(),
        Atom::Divides { exp, term, .. } => {
            max_exp = max_exp.max(*exp);
            vals += term_vals(term, p);
        }
    });
    1 + max_exp + vals
}

/// The least order of a torsion value.
pub fn element_order(member: &StructureHandle, v: &Value) -> Option<BigUint> {
    match (member, v) {
        (StructureHandle::Torsion(g), Value::Tor(t)) => Some(g.order_of(t)),
        _ => None,
    }
}
