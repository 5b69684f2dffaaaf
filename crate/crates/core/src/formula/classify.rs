//! Negation normal form, prenex normalization and quantifier classification.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Atom, Formula, Term};
use super::invariants::InvCondition;
use super::pp::recognize_pp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuantClass {
    QuantifierFree,
    Universal,
    Existential,
    ExistsForall,
    ForallExists,
    PP,
    BoolPP,
    InvariantsSentence,
    Other,
}

impl fmt::Display for QuantClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// A formula in prenex form: quantifier prefix over a quantifier-free matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prenex {
    pub prefix: Vec<(Quantifier, String)>,
    pub matrix: Formula,
}

impl Prenex {
    pub fn to_formula(&self) -> Formula {
        self.prefix.iter().rev().fold(self.matrix.clone(), |acc, (q, v)| match q {
            Quantifier::Forall => Formula::forall(v, acc),
            Quantifier::Exists => Formula::exists(v, acc),
        })
    }

    /// Maximal runs of like quantifiers.
    pub fn blocks(&self) -> Vec<Quantifier> {
        let mut out: Vec<Quantifier> = Vec::new();
        for (q, _) in &self.prefix {
            if out.last() != Some(q) {
                out.push(*q);
            }
        }
        out
    }
}

/// Negation normal form without implications. Divisibility atoms are kept.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (Formula::Atom(_), false) => f.clone(),
        (Formula::Atom(_), true) => Formula::not(f.clone()),
        (Formula::Not(x), _) => nnf(x, !neg),
        (Formula::And(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (Formula::And(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Formula::Or(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Formula::Or(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
        (Formula::Implies(a, b), false) => Formula::or(nnf(a, true), nnf(b, false)),
        (Formula::Implies(a, b), true) => Formula::and(nnf(a, false), nnf(b, true)),
        (Formula::Forall(v, x), false) => Formula::forall(v, nnf(x, false)),
        (Formula::Forall(v, x), true) => Formula::exists(v, nnf(x, true)),
        (Formula::Exists(v, x), false) => Formula::exists(v, nnf(x, false)),
        (Formula::Exists(v, x), true) => Formula::forall(v, nnf(x, true)),
    }
}

/// Rename bound variables to `x0, x1, ...` in binding order, skipping names
/// that occur free.
fn canonical_rename(f: &Formula, free: &BTreeSet<String>, counter: &mut usize) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(x) => Formula::not(canonical_rename(x, free, counter)),
        Formula::And(a, b) => {
            let a = canonical_rename(a, free, counter);
            Formula::and(a, canonical_rename(b, free, counter))
        }
        Formula::Or(a, b) => {
            let a = canonical_rename(a, free, counter);
            Formula::or(a, canonical_rename(b, free, counter))
        }
        Formula::Implies(a, b) => {
            let a = canonical_rename(a, free, counter);
            Formula::implies(a, canonical_rename(b, free, counter))
        }
        Formula::Forall(v, x) | Formula::Exists(v, x) => {
            let name = loop {
                let c = format!("x{counter}");
                *counter += 1;
                if !free.contains(&c) {
                    break c;
                }
            };
            let body = x.substitute(v, &Term::Var(name.clone()));
            let body = canonical_rename(&body, free, counter);
            match f {
                Formula::Forall(..) => Formula::forall(&name, body),
                _ => Formula::exists(&name, body),
            }
        }
    }
}

/// Prenex normal form. Divisibility atoms are expanded to their existential
/// definitions first, so the prefix reflects the true quantifier structure.
/// Where quantifier blocks of the two sides of a connective can be interleaved
/// in several ways, the merge with the fewest alternations is chosen,
/// existential blocks first on ties.
pub fn prenex(f: &Formula) -> Prenex {
    let expanded = to_nnf(&f.expand_divides());
    let free = expanded.free_vars();
    let mut counter = 0;
    let renamed = canonical_rename(&expanded, &free, &mut counter);
    let (blocks, matrix) = pull(&renamed);
    Prenex {
        prefix: blocks.into_iter().flat_map(|(q, vs)| vs.into_iter().map(move |v| (q, v))).collect(),
        matrix,
    }
}

type Blocks = Vec<(Quantifier, Vec<String>)>;

fn pull(f: &Formula) -> (Blocks, Formula) {
    match f {
        Formula::Forall(v, x) | Formula::Exists(v, x) => {
            let q = if matches!(f, Formula::Forall(..)) {
                Quantifier::Forall
            } else {
                Quantifier::Exists
            };
            let (mut blocks, m) = pull(x);
            match blocks.first_mut() {
                Some((q2, vs)) if *q2 == q => vs.insert(0, v.clone()),
                _ => blocks.insert(0, (q, vec![v.clone()])),
            }
            (blocks, m)
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (ba, ma) = pull(a);
            let (bb, mb) = pull(b);
            let m = if matches!(f, Formula::And(..)) {
                Formula::and(ma, mb)
            } else {
                Formula::or(ma, mb)
            };
            (merge(&ba, &bb), m)
        }
        _ => (Vec::new(), f.clone()),
    }
}

fn merge(a: &[(Quantifier, Vec<String>)], b: &[(Quantifier, Vec<String>)]) -> Blocks {
    if a.is_empty() {
        return b.to_vec();
    }
    if b.is_empty() {
        return a.to_vec();
    }
    if a[0].0 == b[0].0 {
        let mut vars = a[0].1.clone();
        vars.extend(b[0].1.iter().cloned());
        let mut rest = merge(&a[1..], &b[1..]);
        match rest.first_mut() {
            Some((q, vs)) if *q == a[0].0 => {
                vars.append(vs);
                rest.remove(0);
            }
            _ => {}
        }
        rest.insert(0, (a[0].0, vars));
        return rest;
    }
    let take = |first: &[(Quantifier, Vec<String>)], other: &[(Quantifier, Vec<String>)]| {
        let mut rest = merge(&first[1..], other);
        match rest.first_mut() {
            Some((q, vs)) if *q == first[0].0 => {
                let mut vars = first[0].1.clone();
                vars.append(vs);
                *vs = vars;
            }
            _ => rest.insert(0, first[0].clone()),
        }
        rest
    };
    let from_a = take(a, b);
    let from_b = take(b, a);
    let exists_first = |x: &Blocks| x[0].0 == Quantifier::Exists;
    match from_a.len().cmp(&from_b.len()) {
        std::cmp::Ordering::Less => from_a,
        std::cmp::Ordering::Greater => from_b,
        std::cmp::Ordering::Equal => {
            if exists_first(&from_a) || !exists_first(&from_b) {
                from_a
            } else {
                from_b
            }
        }
    }
}

fn is_bool_combination_of_pp(f: &Formula) -> bool {
    match f {
        Formula::Not(x) => is_bool_combination_of_pp(x),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            if recognize_pp(f).is_ok() {
                return true;
            }
            is_bool_combination_of_pp(a) && is_bool_combination_of_pp(b)
        }
        Formula::Atom(Atom::Rel(..)) => false,
        _ => recognize_pp(f).is_ok(),
    }
}

/// The most specific transfer class of `f`.
///
/// Checked in order: invariants sentence, quantifier-free (no divisibility
/// atoms), p.p., boolean combination of p.p., then the prenex prefix shape.
pub fn classify_quantifier(f: &Formula) -> QuantClass {
    if InvCondition::from_formula(f).is_some() {
        return QuantClass::InvariantsSentence;
    }
    if f.is_quantifier_free() && !f.mentions_divides() {
        return QuantClass::QuantifierFree;
    }
    if recognize_pp(f).is_ok() {
        return QuantClass::PP;
    }
    if is_bool_combination_of_pp(f) {
        return QuantClass::BoolPP;
    }
    prefix_class(&prenex(f))
}

/// Class from the prenex prefix alone.
pub fn prefix_class(p: &Prenex) -> QuantClass {
    use Quantifier::*;
    match p.blocks().as_slice() {
        [] => QuantClass::QuantifierFree,
        [Forall] => QuantClass::Universal,
        [Exists] => QuantClass::Existential,
        [Exists, Forall] => QuantClass::ExistsForall,
        [Forall, Exists] => QuantClass::ForallExists,
        _ => QuantClass::Other,
    }
}
