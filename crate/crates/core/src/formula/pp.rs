//! Positive-primitive formulas over Z: conjunctions of `p^n | tau` and `tau = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::ast::{Atom, Formula, Term};
use crate::arith::prime_power;

/// Integer linear combination of variables; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinComb(pub BTreeMap<String, BigInt>);

impl LinComb {
    pub fn var(v: &str) -> Self {
        LinComb(BTreeMap::from([(v.to_string(), BigInt::one())]))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(mut self, other: &LinComb) -> Self {
        for (v, c) in &other.0 {
            let e = self.0.entry(v.clone()).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                self.0.remove(v);
            }
        }
        self
    }

    pub fn scale(mut self, k: &BigInt) -> Self {
        if k.is_zero() {
            return LinComb::default();
        }
        for c in self.0.values_mut() {
            *c *= k;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, v: &str) -> BigInt {
        self.0.get(v).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }

    /// Back to a term: `c1*v1 + c2*v2 + ...`, or `0` when empty.
    pub fn to_term(&self) -> Term {
        let mut parts = self.0.iter().map(|(v, c)| {
            if c.is_one() {
                Term::var(v)
            } else {
                Term::scalar(c.clone(), Term::var(v))
            }
        });
        match parts.next() {
            None => Term::zero(),
            Some(first) => parts.fold(first, Term::add),
        }
    }
}

/// Linearize a module-language term. `None` if the term uses other symbols.
pub fn linearize(t: &Term) -> Option<LinComb> {
    match t {
        Term::Var(v) => Some(LinComb::var(v)),
        Term::App(f, args) => match (f.as_str(), args.as_slice()) {
            ("+", [a, b]) => Some(linearize(a)?.add(&linearize(b)?)),
            ("-", [a]) => Some(linearize(a)?.scale(&BigInt::from(-1))),
            ("0", []) => Some(LinComb::default()),
            _ => None,
        },
        Term::Scalar(k, t) => Some(linearize(t)?.scale(k)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PPCond {
    /// `prime^exp | tau`
    Div { prime: u64, exp: u32, tau: LinComb },
    /// `tau = 0`
    Ann { tau: LinComb },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PPNormal {
    pub conds: Vec<PPCond>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotPP {
    pub offending: Formula,
    pub reason: String,
}

impl fmt::Display for NotPP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not p.p. ({}): {}", self.reason, self.offending)
    }
}

fn not_pp(f: &Formula, reason: &str) -> NotPP {
    NotPP {
        offending: f.clone(),
        reason: reason.to_string(),
    }
}

/// Recognize a p.p. formula up to associativity and commutativity of `&`.
///
/// Accepted conjuncts: `t1 = t2` over the module language, `p^n | t`, and
/// `exists y. k*y = t` (either side) with `|k|` a prime power and `y` not in `t`.
pub fn recognize_pp(f: &Formula) -> Result<PPNormal, NotPP> {
    let mut conds = Vec::new();
    collect(f, &mut conds)?;
    Ok(PPNormal { conds })
}

fn collect(f: &Formula, out: &mut Vec<PPCond>) -> Result<(), NotPP> {
    match f {
        Formula::And(a, b) => {
            collect(a, out)?;
            collect(b, out)
        }
        Formula::Atom(Atom::Eq(a, b)) => {
            let (la, lb) = match (linearize(a), linearize(b)) {
                (Some(la), Some(lb)) => (la, lb),
                _ => return Err(not_pp(f, "term outside the module language")),
            };
            out.push(PPCond::Ann {
                tau: la.add(&lb.scale(&BigInt::from(-1))),
            });
            Ok(())
        }
        Formula::Atom(Atom::Divides { prime, exp, term }) => {
            let tau = linearize(term).ok_or_else(|| not_pp(f, "term outside the module language"))?;
            out.push(PPCond::Div {
                prime: *prime,
                exp: *exp,
                tau,
            });
            Ok(())
        }
        Formula::Atom(Atom::Rel(..)) => Err(not_pp(f, "relation symbol")),
        Formula::Exists(y, body) => {
            let (a, b) = match &**body {
                Formula::Atom(Atom::Eq(a, b)) => (a, b),
                _ => return Err(not_pp(f, "existential over a non-equation")),
            };
            let (la, lb) = match (linearize(a), linearize(b)) {
                (Some(la), Some(lb)) => (la, lb),
                _ => return Err(not_pp(f, "term outside the module language")),
            };
            let (witness, tau) = if la.vars() == BTreeSet::from([y.clone()]) && !lb.0.contains_key(y) {
                (la, lb)
            } else if lb.vars() == BTreeSet::from([y.clone()]) && !la.0.contains_key(y) {
                (lb, la)
            } else {
                return Err(not_pp(f, "existential witness not isolated"));
            };
            let k = witness.coeff(y).abs();
            if k.is_one() {
                // `exists y. y = t` holds trivially.
                out.push(PPCond::Ann { tau: LinComb::default() });
                return Ok(());
            }
            let k = k.to_biguint().unwrap();
            match prime_power(&k) {
                Some((prime, exp)) => {
                    out.push(PPCond::Div { prime, exp, tau });
                    Ok(())
                }
                None => Err(not_pp(f, "witness coefficient is not a prime power")),
            }
        }
        Formula::Not(_) => Err(not_pp(f, "negation")),
        Formula::Or(..) => Err(not_pp(f, "disjunction")),
        Formula::Implies(..) => Err(not_pp(f, "implication")),
        Formula::Forall(..) => Err(not_pp(f, "universal quantifier")),
    }
}

impl PPNormal {
    pub fn vars(&self) -> BTreeSet<String> {
        self.conds
            .iter()
            .flat_map(|c| match c {
                PPCond::Div { tau, .. } | PPCond::Ann { tau } => tau.vars(),
            })
            .collect()
    }

    pub fn to_formula(&self) -> Formula {
        let parts = self.conds.iter().map(|c| match c {
            PPCond::Div { prime, exp, tau } => Formula::divides(*prime, *exp, tau.to_term()),
            PPCond::Ann { tau } => Formula::eq(tau.to_term(), Term::zero()),
        });
        Formula::conj(parts).unwrap_or_else(|| Formula::eq(Term::zero(), Term::zero()))
    }

    /// Single-variable view; `None` if more than one variable occurs.
    pub fn unary(&self) -> Option<UnaryPP> {
        let vars = self.vars();
        if vars.len() > 1 {
            return None;
        }
        let v = vars.into_iter().next().unwrap_or_default();
        Some(UnaryPP::new(
            self.conds
                .iter()
                .map(|c| match c {
                    PPCond::Div { prime, exp, tau } => UnaryCond::Div {
                        prime: *prime,
                        exp: *exp,
                        coeff: tau.coeff(&v).abs(),
                    },
                    PPCond::Ann { tau } => UnaryCond::Ann { coeff: tau.coeff(&v).abs() },
                })
                .collect(),
        ))
    }
}

/// A condition on one variable `x`: `p^n | c*x` or `c*x = 0`, with `c >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnaryCond {
    Div { prime: u64, exp: u32, coeff: BigInt },
    Ann { coeff: BigInt },
}

/// A single-variable p.p. formula in canonical form (sorted, deduplicated).
/// The empty conjunction is `x = x`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnaryPP {
    pub conds: Vec<UnaryCond>,
}

impl UnaryPP {
    pub fn new(conds: Vec<UnaryCond>) -> Self {
        let mut conds: Vec<UnaryCond> = conds
            .into_iter()
            .map(|c| match c {
                UnaryCond::Div { prime, exp, coeff } => UnaryCond::Div {
                    prime,
                    exp,
                    coeff: coeff.abs(),
                },
                UnaryCond::Ann { coeff } => UnaryCond::Ann { coeff: coeff.abs() },
            })
            // `0*x = 0` and `p^n | 0` are trivially true.
            .filter(|c| match c {
                UnaryCond::Div { coeff, .. } | UnaryCond::Ann { coeff } => !coeff.is_zero(),
            })
            .collect();
        conds.sort();
        conds.dedup();
        UnaryPP { conds }
    }

    pub fn trivial() -> Self {
        UnaryPP::default()
    }

    pub fn div(prime: u64, exp: u32, coeff: i64) -> Self {
        UnaryPP::new(vec![UnaryCond::Div {
            prime,
            exp,
            coeff: coeff.into(),
        }])
    }

    pub fn ann(coeff: i64) -> Self {
        UnaryPP::new(vec![UnaryCond::Ann { coeff: coeff.into() }])
    }

    pub fn and(&self, other: &UnaryPP) -> UnaryPP {
        UnaryPP::new(self.conds.iter().chain(other.conds.iter()).cloned().collect())
    }

    /// The formula with the variable replaced by `t`.
    pub fn apply(&self, t: &Term) -> Formula {
        let scaled = |c: &BigInt| {
            if c.is_one() {
                t.clone()
            } else {
                Term::scalar(c.clone(), t.clone())
            }
        };
        let parts = self.conds.iter().map(|c| match c {
            UnaryCond::Div { prime, exp, coeff } => Formula::divides(*prime, *exp, scaled(coeff)),
            UnaryCond::Ann { coeff } => Formula::eq(scaled(coeff), Term::zero()),
        });
        Formula::conj(parts).unwrap_or_else(|| Formula::eq(t.clone(), t.clone()))
    }

    pub fn to_formula(&self, var: &str) -> Formula {
        self.apply(&Term::var(var))
    }

    /// Largest divisibility exponent and coefficient valuation at `p`.
    pub fn exponent_bound(&self, p: u64) -> u32 {
        self.conds
            .iter()
            .map(|c| match c {
                UnaryCond::Div { prime, exp, coeff } => {
                    let v = crate::arith::valuation(coeff, p).unwrap_or(0);
                    if *prime == p {
                        (*exp).max(v)
                    } else {
                        v
                    }
                }
                UnaryCond::Ann { coeff } => crate::arith::valuation(coeff, p).unwrap_or(0),
            })
            .max()
            .unwrap_or(0)
    }

    /// Prime divisors relevant to the conditions.
    pub fn primes(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        for c in &self.conds {
            let coeff = match c {
                UnaryCond::Div { prime, coeff, .. } => {
                    out.insert(*prime);
                    coeff
                }
                UnaryCond::Ann { coeff } => coeff,
            };
            if let Some(m) = coeff.to_biguint() {
                if m > BigUint::one() {
                    for (p, _) in crate::arith::factorize_big(&m) {
                        out.insert(num_traits::ToPrimitive::to_u64(&p).unwrap_or(0));
                    }
                }
            }
        }
        out
    }

    /// Parse text with exactly one free variable (or none) as a single-variable p.p. formula.
    pub fn parse(text: &str) -> Result<UnaryPP, super::FormulaError> {
        let f = super::parse_formula(text, &super::Signature::module())?;
        if f.free_vars().len() > 1 {
            return Err(super::FormulaError::MultipleFreeVariables(f.free_vars().into_iter().collect()));
        }
        let pp = recognize_pp(&f).map_err(|e| super::FormulaError::NotPP(e.to_string()))?;
        Ok(pp.unary().expect("at most one variable"))
    }
}

impl fmt::Display for UnaryPP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula("x"))
    }
}
