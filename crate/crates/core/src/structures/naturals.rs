//! The standard model of the naturals, with exact quantifier-free
//! evaluation and the polynomial bookkeeping needed to decide truth along
//! eventually-simple sequences.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::EvalError;
use crate::arith::{lcm, pow};
use crate::formula::{Atom, Formula, Signature, Term};

/// `(N, +, *, <, <=)` with numerals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NatModel;

impl NatModel {
    pub fn signature(&self) -> Signature {
        Signature::naturals()
    }

    pub fn eval_term(&self, t: &Term, env: &HashMap<String, BigUint>) -> Result<BigUint, EvalError> {
        match t {
            Term::Var(v) => env.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.clone())),
            Term::App(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_term(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                match (f.as_str(), vals.as_slice()) {
                    ("+", [a, b]) => Ok(a + b),
                    ("mul", [a, b]) => Ok(a * b),
                    (n, []) => n.parse::<BigUint>().map_err(|_| EvalError::UnknownSymbol(f.clone())),
                    _ => Err(EvalError::UnknownSymbol(f.clone())),
                }
            }
            Term::Scalar(k, t) => {
                let k = k
                    .to_biguint()
                    .ok_or_else(|| EvalError::Unsupported("negative scalars have no meaning in N".into()))?;
                Ok(k * self.eval_term(t, env)?)
            }
        }
    }

    /// Truth of a quantifier-free formula.
    pub fn eval_qf(&self, f: &Formula, env: &HashMap<String, BigUint>) -> Result<bool, EvalError> {
        match f {
            Formula::Atom(a) => self.eval_atom(a, env),
            Formula::Not(x) => Ok(!self.eval_qf(x, env)?),
            Formula::And(a, b) => Ok(self.eval_qf(a, env)? && self.eval_qf(b, env)?),
            Formula::Or(a, b) => Ok(self.eval_qf(a, env)? || self.eval_qf(b, env)?),
            Formula::Implies(a, b) => Ok(!self.eval_qf(a, env)? || self.eval_qf(b, env)?),
            Formula::Forall(..) | Formula::Exists(..) => Err(EvalError::Unsupported(
                "quantified formulas are not decided in N".into(),
            )),
        }
    }

    fn eval_atom(&self, a: &Atom, env: &HashMap<String, BigUint>) -> Result<bool, EvalError> {
        match a {
            Atom::Eq(s, t) => Ok(self.eval_term(s, env)? == self.eval_term(t, env)?),
            Atom::Rel(r, args) if args.len() == 2 => {
                let (x, y) = (self.eval_term(&args[0], env)?, self.eval_term(&args[1], env)?);
                match r.as_str() {
                    "lt" => Ok(x < y),
                    "le" => Ok(x <= y),
                    _ => Err(EvalError::UnknownSymbol(r.clone())),
                }
            }
            Atom::Rel(r, _) => Err(EvalError::UnknownSymbol(r.clone())),
            Atom::Divides { prime, exp, term } => {
                Ok((self.eval_term(term, env)? % pow(*prime, *exp)).is_zero())
            }
        }
    }
}

/// An integer polynomial in one variable, as exponent -> coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly(pub BTreeMap<u32, BigInt>);

impl Poly {
    fn constant(c: BigInt) -> Poly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(0, c);
        }
        Poly(m)
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut m = self.0.clone();
        for (e, c) in &other.0 {
            *m.entry(*e).or_insert_with(BigInt::zero) += c;
        }
        m.retain(|_, c| !c.is_zero());
        Poly(m)
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &other.0 {
                let term = Poly([(e1 + e2, c1 * c2)].into_iter().collect());
                out = out.add(&term);
            }
        }
        out
    }

    /// A bound beyond which the sign of the polynomial is constant.
    pub fn sign_threshold(&self) -> BigUint {
        // Every real root has modulus at most 1 + sum |a_i| / |a_lead|.
        let sum: BigInt = self.0.values().map(|c| c.abs()).sum();
        BigUint::one() + sum.to_biguint().unwrap_or_default()
    }
}

/// `t` as a polynomial in `x`, when `x` is its only variable.
pub fn term_poly(t: &Term, x: &str) -> Option<Poly> {
    match t {
        Term::Var(v) if v == x => Some(Poly([(1, BigInt::one())].into_iter().collect())),
        Term::Var(_) => None,
        Term::App(f, args) => match (f.as_str(), args.as_slice()) {
            ("+", [a, b]) => Some(term_poly(a, x)?.add(&term_poly(b, x)?)),
            ("mul", [a, b]) => Some(term_poly(a, x)?.mul(&term_poly(b, x)?)),
            (n, []) => n.parse::<BigInt>().ok().map(Poly::constant),
            _ => None,
        },
        Term::Scalar(k, t) => Some(Poly::constant(k.clone()).mul(&term_poly(t, x)?)),
    }
}

/// Data for deciding a quantifier-free formula in `x` along a sequence:
/// beyond `threshold` every order atom is constant, and divisibility atoms
/// only depend on `x` modulo `modulus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stabilization {
    pub threshold: BigUint,
    pub modulus: BigUint,
}

pub fn stabilization(f: &Formula, x: &str) -> Result<Stabilization, EvalError> {
    if !f.is_quantifier_free() {
        return Err(EvalError::Unsupported("only quantifier-free formulas stabilize".into()));
    }
    let mut threshold = BigUint::zero();
    let mut modulus = BigUint::one();
    let mut failure = None;
    f.visit_atoms(&mut |a| {
        let polys = match a {
            Atom::Eq(s, t) => vec![(s, t)],
            Atom::Rel(_, args) if args.len() == 2 => vec![(&args[0], &args[1])],
            Atom::Rel(r, _) => {
                failure = Some(EvalError::UnknownSymbol(r.clone()));
                vec![]
            }
            Atom::Divides { prime, exp, term } => {
                if term_poly(term, x).is_none() {
                    failure = Some(EvalError::Unsupported(format!("`{term}` is not a polynomial in {x}")));
                }
                modulus = lcm(&modulus, &pow(*prime, *exp));
                vec![]
            }
        };
        for (s, t) in polys {
            match (term_poly(s, x), term_poly(t, x)) {
                (Some(p), Some(q)) => {
                    let d = p.add(&q.mul(&Poly::constant(BigInt::from(-1))));
                    threshold = threshold.clone().max(d.sign_threshold());
                }
                _ => failure = Some(EvalError::Unsupported(format!("`{s}` or `{t}` is not a polynomial in {x}"))),
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(Stabilization { threshold, modulus }),
    }
}
