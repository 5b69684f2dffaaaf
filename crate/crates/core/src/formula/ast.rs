use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};

/// A term over a signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
    /// `k*t`; only under scalar-flagged signatures.
    Scalar(BigInt, Box<Term>),
}

/// Atomic formulas. `Divides(p, n, t)` abbreviates `exists y. p^n*y = t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Divides { prime: u64, exp: u32, term: Term },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::App(name.to_string(), vec![])
    }

    pub fn zero() -> Term {
        Term::constant("0")
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Term, b: Term) -> Term {
        Term::App("+".into(), vec![a, b])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Term) -> Term {
        Term::App("-".into(), vec![a])
    }

    pub fn scalar(k: impl Into<BigInt>, t: Term) -> Term {
        Term::Scalar(k.into(), Box::new(t))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Scalar(_, t) => t.collect_vars(out),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    pub fn substitute(&self, var: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => by.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(var, by)).collect()),
            Term::Scalar(k, t) => Term::Scalar(k.clone(), Box::new(t.substitute(var, by))),
        }
    }

    pub fn mentions_function(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(..) => true,
            Term::Scalar(_, t) => t.mentions_function(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Scalar(_, t) => 1 + t.depth(),
        }
    }
}

impl Atom {
    fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Eq(a, b) => vec![a, b],
            Atom::Rel(_, args) => args.iter().collect(),
            Atom::Divides { term, .. } => vec![term],
        }
    }

    pub fn substitute(&self, var: &str, by: &Term) -> Atom {
        match self {
            Atom::Eq(a, b) => Atom::Eq(a.substitute(var, by), b.substitute(var, by)),
            Atom::Rel(r, args) => Atom::Rel(r.clone(), args.iter().map(|a| a.substitute(var, by)).collect()),
            Atom::Divides { prime, exp, term } => Atom::Divides {
                prime: *prime,
                exp: *exp,
                term: term.substitute(var, by),
            },
        }
    }

    /// `p^n` as an integer.
    pub fn divisor(prime: u64, exp: u32) -> BigUint {
        crate::arith::pow(prime, exp)
    }
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Eq(a, b))
    }

    pub fn rel(r: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::Rel(r.to_string(), args))
    }

    pub fn divides(prime: u64, exp: u32, term: Term) -> Formula {
        Formula::Atom(Atom::Divides { prime, exp, term })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::or)
    }

    /// `x = x` on a fresh-free variable, used as the empty conjunction.
    pub fn truth(var: &str) -> Formula {
        Formula::eq(Term::var(var), Term::var(var))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                for t in a.terms() {
                    for v in t.vars() {
                        if !bound.contains(&v) {
                            out.insert(v);
                        }
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// All variables, free or bound.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            for t in a.terms() {
                t.collect_vars(&mut out);
            }
        });
        self.visit_binders(&mut |v| {
            out.insert(v.to_string());
        });
        out
    }

    pub fn visit_atoms(&self, f: &mut impl FnMut(&Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(x) => x.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Formula::Forall(_, x) | Formula::Exists(_, x) => x.visit_atoms(f),
        }
    }

    fn visit_binders(&self, f: &mut impl FnMut(&str)) {
        match self {
            Formula::Atom(_) => {}
            Formula::Not(x) => x.visit_binders(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_binders(f);
                b.visit_binders(f);
            }
            Formula::Forall(v, x) | Formula::Exists(v, x) => {
                f(v);
                x.visit_binders(f);
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(x) => x.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    pub fn mentions_function(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| {
            if a.terms().iter().any(|t| t.mentions_function()) {
                found = true;
            }
        });
        found
    }

    pub fn mentions_divides(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| {
            if matches!(a, Atom::Divides { .. }) {
                found = true;
            }
        });
        found
    }

    /// Capture-avoiding substitution of `by` for free occurrences of `var`.
    pub fn substitute(&self, var: &str, by: &Term) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(a.substitute(var, by)),
            Formula::Not(x) => Formula::not(x.substitute(var, by)),
            Formula::And(a, b) => Formula::and(a.substitute(var, by), b.substitute(var, by)),
            Formula::Or(a, b) => Formula::or(a.substitute(var, by), b.substitute(var, by)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(var, by), b.substitute(var, by)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                if v == var {
                    return self.clone();
                }
                let by_vars = by.vars();
                let (v2, body2) = if by_vars.contains(v) {
                    let mut avoid = body.all_vars();
                    avoid.extend(by_vars);
                    avoid.insert(var.to_string());
                    let fresh = fresh_name(v, &avoid);
                    (fresh.clone(), body.substitute(v, &Term::Var(fresh)))
                } else {
                    (v.clone(), (**body).clone())
                };
                let inner = body2.substitute(var, by);
                match self {
                    Formula::Forall(..) => Formula::Forall(v2, Box::new(inner)),
                    _ => Formula::Exists(v2, Box::new(inner)),
                }
            }
        }
    }

    /// Rename the single free variable `from` to `to`.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        self.substitute(from, &Term::var(to))
    }

    /// Replace every divisibility atom by its existential definition.
    pub fn expand_divides(&self) -> Formula {
        match self {
            Formula::Atom(Atom::Divides { prime, exp, term }) => {
                let mut avoid = term.vars();
                avoid.insert("y".into());
                let y = fresh_name("y", &avoid);
                let k = BigInt::from(Atom::divisor(*prime, *exp));
                Formula::exists(&y, Formula::eq(Term::scalar(k, Term::Var(y.clone())), term.clone()))
            }
            Formula::Atom(_) => self.clone(),
            Formula::Not(x) => Formula::not(x.expand_divides()),
            Formula::And(a, b) => Formula::and(a.expand_divides(), b.expand_divides()),
            Formula::Or(a, b) => Formula::or(a.expand_divides(), b.expand_divides()),
            Formula::Implies(a, b) => Formula::implies(a.expand_divides(), b.expand_divides()),
            Formula::Forall(v, x) => Formula::forall(v, x.expand_divides()),
            Formula::Exists(v, x) => Formula::exists(v, x.expand_divides()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(x) => 1 + x.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Forall(_, x) | Formula::Exists(_, x) => 1 + x.depth(),
        }
    }
}

/// `base` itself if unused, else `base_1`, `base_2`, ...
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|c| !avoid.contains(c))
        .unwrap()
}
