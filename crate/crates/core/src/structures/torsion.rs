//! Countable torsion abelian groups presented as formal direct sums of
//! cyclic p-groups, Prufer groups and affine-exponent tails.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::finite::FiniteStructure;
use super::EvalError;
use crate::arith::{is_prime, lcm, mod_inverse, modulo, pow, valuation_u};
use crate::formula::{linearize, recognize_pp, Atom, Formula, LinComb, PPCond, PPNormal};

/// The affine form `n -> a*n + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Affine {
    pub a: i64,
    pub b: i64,
}

impl Affine {
    pub fn new(a: i64, b: i64) -> Self {
        Affine { a, b }
    }

    pub fn at(&self, n: u64) -> i128 {
        self.a as i128 * n as i128 + self.b as i128
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}n{:+}", self.a, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Finite(u64),
    Omega,
}

impl Multiplicity {
    pub fn admits(&self, component: u64) -> bool {
        match self {
            Multiplicity::Finite(m) => component < *m,
            Multiplicity::Omega => true,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(m) => write!(f, "{m}"),
            Multiplicity::Omega => write!(f, "omega"),
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Finite(m) => s.serialize_u64(*m),
            Multiplicity::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(m) => Ok(Multiplicity::Finite(m)),
            Raw::S(s) if s == "omega" || s == "ω" => Ok(Multiplicity::Omega),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad multiplicity `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Summand {
    /// `mult` copies of `Z_{p^k}`.
    Cyclic { p: u64, k: u32, mult: Multiplicity },
    /// `mult` copies of `Z(p^inf)`.
    Prufer { p: u64, mult: Multiplicity },
    /// `(+)_{n < omega} Z_{p^{h(n)}}`.
    Tail { p: u64, h: Affine },
}

/// One basic component of a summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    Cyclic { p: u64, k: u32 },
    Prufer { p: u64 },
}

impl Component {
    pub fn prime(&self) -> u64 {
        match self {
            Component::Cyclic { p, .. } | Component::Prufer { p } => *p,
        }
    }
}

impl Summand {
    pub fn prime(&self) -> u64 {
        match self {
            Summand::Cyclic { p, .. } | Summand::Prufer { p, .. } | Summand::Tail { p, .. } => *p,
        }
    }

    pub fn multiplicity(&self) -> Multiplicity {
        match self {
            Summand::Cyclic { mult, .. } | Summand::Prufer { mult, .. } => *mult,
            Summand::Tail { .. } => Multiplicity::Omega,
        }
    }

    pub fn component(&self, index: u64) -> Result<Component, EvalError> {
        if !self.multiplicity().admits(index) {
            return Err(EvalError::Element(format!("component {index} out of range for {self}")));
        }
        Ok(match self {
            Summand::Cyclic { p, k, .. } => Component::Cyclic { p: *p, k: *k },
            Summand::Prufer { p, .. } => Component::Prufer { p: *p },
            Summand::Tail { p, h } => {
                let k = h.at(index);
                let k = u32::try_from(k)
                    .map_err(|_| EvalError::Element(format!("exponent {k} of component {index} out of range")))?;
                Component::Cyclic { p: *p, k }
            }
        })
    }

    fn validate(&self) -> Result<(), EvalError> {
        let p = self.prime();
        if !is_prime(p) {
            return Err(EvalError::Structure(format!("{p} is not prime")));
        }
        match self {
            Summand::Cyclic { k, mult, .. } => {
                if *k == 0 {
                    return Err(EvalError::Structure("cyclic exponent must be at least 1".into()));
                }
                if *mult == Multiplicity::Finite(0) {
                    return Err(EvalError::Structure("multiplicity must be positive".into()));
                }
            }
            Summand::Prufer { mult, .. } => {
                if *mult == Multiplicity::Finite(0) {
                    return Err(EvalError::Structure("multiplicity must be positive".into()));
                }
            }
            Summand::Tail { h, .. } => {
                if h.a < 1 || h.b < 0 {
                    return Err(EvalError::Structure(format!(
                        "tail exponent {h} must be strictly increasing and non-negative"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Summand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Summand::Cyclic { p, k, mult } => write!(f, "Z_{p}^{k} x {mult}"),
            Summand::Prufer { p, mult } => write!(f, "Z({p}^inf) x {mult}"),
            Summand::Tail { p, h } => write!(f, "(+)_n Z_{p}^({h})"),
        }
    }
}

/// A value in one basic component.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentValue {
    /// A residue modulo `p^k`.
    Residue(BigUint),
    /// The reduced fraction `num / p^exp` modulo 1.
    Fraction { num: BigUint, exp: u32 },
}

impl ComponentValue {
    pub fn is_zero(&self) -> bool {
        match self {
            ComponentValue::Residue(r) => r.is_zero(),
            ComponentValue::Fraction { num, .. } => num.is_zero(),
        }
    }

    /// Bring a value into canonical form for the component.
    fn normalize(self, c: Component) -> Result<Self, EvalError> {
        match (self, c) {
            (ComponentValue::Residue(r), Component::Cyclic { p, k }) => Ok(ComponentValue::Residue(r % pow(p, k))),
            (ComponentValue::Fraction { num, exp }, Component::Prufer { p }) => Ok(reduce_fraction(num, exp, p)),
            (v, c) => Err(EvalError::Element(format!("value {v:?} does not fit component {c:?}"))),
        }
    }

    /// `k * self`, for any integer `k`.
    fn scale(&self, k: &BigInt, c: Component) -> Self {
        match (self, c) {
            (ComponentValue::Residue(r), Component::Cyclic { p, k: e }) => {
                let m = pow(p, e);
                ComponentValue::Residue(modulo(&(BigInt::from(r.clone()) * k), &m))
            }
            (ComponentValue::Fraction { num, exp }, Component::Prufer { p }) => {
                let m = pow(p, *exp);
                reduce_fraction(modulo(&(BigInt::from(num.clone()) * k), &m), *exp, p)
            }
            _ => unreachable!("validated component value"),
        }
    }

    fn add(&self, other: &Self, c: Component) -> Self {
        match (self, other, c) {
            (ComponentValue::Residue(a), ComponentValue::Residue(b), Component::Cyclic { p, k }) => {
                ComponentValue::Residue((a + b) % pow(p, k))
            }
            (
                ComponentValue::Fraction { num: a, exp: ea },
                ComponentValue::Fraction { num: b, exp: eb },
                Component::Prufer { p },
            ) => {
                let e = (*ea).max(*eb);
                let sum = a * pow(p, e - ea) + b * pow(p, e - eb);
                reduce_fraction(sum % pow(p, e), e, p)
            }
            _ => unreachable!("validated component value"),
        }
    }

    /// Least positive `r` with `r * self = 0`.
    pub fn order(&self, c: Component) -> BigUint {
        match (self, c) {
            (ComponentValue::Residue(r), Component::Cyclic { p, k }) => match valuation_u(r, p) {
                None => BigUint::one(),
                Some(v) => pow(p, k - v.min(k)),
            },
            (ComponentValue::Fraction { exp, .. }, Component::Prufer { p }) => pow(p, *exp),
            _ => unreachable!("validated component value"),
        }
    }

    /// Whether `p^n` divides this value inside the component.
    pub fn divisible(&self, p: u64, n: u32, c: Component) -> bool {
        match (self, c) {
            (ComponentValue::Residue(r), Component::Cyclic { p: q, k }) => {
                if q != p {
                    return true;
                }
                match valuation_u(r, p) {
                    None => true,
                    Some(v) => v >= n.min(k),
                }
            }
            // Prufer groups are divisible.
            (_, Component::Prufer { .. }) => true,
            _ => unreachable!("validated component value"),
        }
    }

    /// Some `y` in the component with `p^n * y = self`.
    pub fn divide(&self, p: u64, n: u32, c: Component) -> Option<Self> {
        let pn = BigInt::from(pow(p, n));
        match (self, c) {
            (ComponentValue::Residue(r), Component::Cyclic { p: q, k }) => {
                let m = pow(q, k);
                if q != p {
                    let inv = mod_inverse(&pn, &m).expect("coprime to the modulus");
                    return Some(ComponentValue::Residue((r * inv) % m));
                }
                match valuation_u(r, p) {
                    None => Some(ComponentValue::Residue(BigUint::zero())),
                    Some(v) if v >= n => Some(ComponentValue::Residue(r / pow(p, n))),
                    Some(_) => None,
                }
            }
            (ComponentValue::Fraction { num, exp }, Component::Prufer { p: q }) => {
                if num.is_zero() {
                    return Some(self.clone());
                }
                if q != p {
                    let m = pow(q, *exp);
                    let inv = mod_inverse(&pn, &m).expect("coprime to the modulus");
                    return Some(reduce_fraction(num * inv, *exp, q));
                }
                Some(reduce_fraction(num.clone(), exp + n, q))
            }
            _ => unreachable!("validated component value"),
        }
    }
}

fn reduce_fraction(mut num: BigUint, mut exp: u32, p: u64) -> ComponentValue {
    let pb = BigUint::from(p);
    num %= pow(p, exp);
    if num.is_zero() {
        return ComponentValue::Fraction { num, exp: 0 };
    }
    while exp > 0 && (&num % &pb).is_zero() {
        num /= &pb;
        exp -= 1;
    }
    ComponentValue::Fraction { num, exp }
}

impl fmt::Display for ComponentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentValue::Residue(r) => write!(f, "{r}"),
            ComponentValue::Fraction { num, exp } => write!(f, "{num}/p^{exp}"),
        }
    }
}

/// An element: finitely many nonzero components, sorted by position.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorsionElement {
    pub support: Vec<(usize, u64, ComponentValue)>,
}

impl TorsionElement {
    pub fn zero() -> Self {
        TorsionElement::default()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }
}

impl fmt::Display for TorsionElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c, v)) in self.support.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{v}@[{s},{c}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorsionGroup {
    pub summands: Vec<Summand>,
}

impl TorsionGroup {
    pub fn new(summands: Vec<Summand>) -> Result<Self, EvalError> {
        let g = TorsionGroup { summands };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.summands.is_empty() {
            return Err(EvalError::Structure("a presentation needs at least one summand".into()));
        }
        self.summands.iter().try_for_each(Summand::validate)
    }

    /// `Z_{q1} (+) ... (+) Z_{qr}` for prime powers `q = p^k`, as cyclic summands.
    pub fn finite(factors: &[(u64, u32)]) -> Result<Self, EvalError> {
        Self::new(
            factors
                .iter()
                .map(|&(p, k)| Summand::Cyclic {
                    p,
                    k,
                    mult: Multiplicity::Finite(1),
                })
                .collect(),
        )
    }

    /// Whether the group is finite.
    pub fn is_finite(&self) -> bool {
        self.summands
            .iter()
            .all(|s| matches!(s, Summand::Cyclic { mult: Multiplicity::Finite(_), .. }))
    }

    pub fn component(&self, summand: usize, index: u64) -> Result<Component, EvalError> {
        self.summands
            .get(summand)
            .ok_or_else(|| EvalError::Element(format!("no summand {summand}")))?
            .component(index)
    }

    /// Build an element from raw entries: values are reduced, repeated
    /// positions are added, zero entries dropped.
    pub fn element(&self, entries: Vec<(usize, u64, ComponentValue)>) -> Result<TorsionElement, EvalError> {
        let mut acc: BTreeMap<(usize, u64), ComponentValue> = BTreeMap::new();
        for (s, i, v) in entries {
            let c = self.component(s, i)?;
            let v = v.normalize(c)?;
            let sum = match acc.remove(&(s, i)) {
                Some(prev) => prev.add(&v, c),
                None => v,
            };
            acc.insert((s, i), sum);
        }
        Ok(TorsionElement {
            support: acc
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|((s, i), v)| (s, i, v))
                .collect(),
        })
    }

    /// The element with residue `r` in one cyclic or tail component.
    pub fn unit(&self, summand: usize, index: u64, r: u64) -> Result<TorsionElement, EvalError> {
        self.element(vec![(summand, index, ComponentValue::Residue(r.into()))])
    }

    /// The element `num / p^exp` in one Prufer component.
    pub fn fraction(&self, summand: usize, index: u64, num: u64, exp: u32) -> Result<TorsionElement, EvalError> {
        self.element(vec![(summand, index, ComponentValue::Fraction { num: num.into(), exp })])
    }

    pub fn check(&self, g: &TorsionElement) -> Result<(), EvalError> {
        let rebuilt = self.element(g.support.clone())?;
        if &rebuilt != g {
            return Err(EvalError::Element(format!("element {g} is not in canonical form")));
        }
        Ok(())
    }

    pub fn add(&self, a: &TorsionElement, b: &TorsionElement) -> TorsionElement {
        self.element(a.support.iter().chain(&b.support).cloned().collect())
            .expect("elements of the same group")
    }

    pub fn scale(&self, g: &TorsionElement, k: &BigInt) -> TorsionElement {
        let support = g
            .support
            .iter()
            .map(|(s, i, v)| {
                let c = self.component(*s, *i).expect("element of this group");
                (*s, *i, v.scale(k, c))
            })
            .filter(|(_, _, v)| !v.is_zero())
            .collect();
        TorsionElement { support }
    }

    pub fn neg(&self, g: &TorsionElement) -> TorsionElement {
        self.scale(g, &BigInt::from(-1))
    }

    /// The least order of `g`: lcm of its component orders (1 for zero).
    pub fn order_of(&self, g: &TorsionElement) -> BigUint {
        g.support.iter().fold(BigUint::one(), |acc, (s, i, v)| {
            let c = self.component(*s, *i).expect("element of this group");
            lcm(&acc, &v.order(c))
        })
    }

    /// `tau(env)` for a linear combination.
    pub fn combine(&self, tau: &LinComb, env: &BTreeMap<String, TorsionElement>) -> Result<TorsionElement, EvalError> {
        let mut acc = TorsionElement::zero();
        for (v, c) in &tau.0 {
            let g = env.get(v).ok_or_else(|| EvalError::Unbound(v.clone()))?;
            acc = self.add(&acc, &self.scale(g, c));
        }
        Ok(acc)
    }

    /// Some `y` with `p^n * y = g`, if `p^n` divides `g`.
    pub fn divide(&self, g: &TorsionElement, p: u64, n: u32) -> Option<TorsionElement> {
        let mut support = Vec::with_capacity(g.support.len());
        for (s, i, v) in &g.support {
            let c = self.component(*s, *i).expect("element of this group");
            let y = v.divide(p, n, c)?;
            if !y.is_zero() {
                support.push((*s, *i, y));
            }
        }
        Some(TorsionElement { support })
    }

    pub fn divisible(&self, g: &TorsionElement, p: u64, n: u32) -> bool {
        g.support.iter().all(|(s, i, v)| {
            let c = self.component(*s, *i).expect("element of this group");
            v.divisible(p, n, c)
        })
    }

    /// Evaluate a p.p. formula in normal form under `env`.
    pub fn eval_pp(&self, pp: &PPNormal, env: &BTreeMap<String, TorsionElement>) -> Result<bool, EvalError> {
        for cond in &pp.conds {
            let ok = match cond {
                PPCond::Div { prime, exp, tau } => self.divisible(&self.combine(tau, env)?, *prime, *exp),
                PPCond::Ann { tau } => self.combine(tau, env)?.is_zero(),
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Evaluate with the free variables (sorted by name) bound to `tuple`.
    pub fn eval_pp_tuple(&self, pp: &PPNormal, tuple: &[TorsionElement]) -> Result<bool, EvalError> {
        let vars = pp.vars();
        if vars.len() != tuple.len() {
            return Err(EvalError::Arity {
                expected: vars.len(),
                found: tuple.len(),
            });
        }
        let env = vars.into_iter().zip(tuple.iter().cloned()).collect();
        self.eval_pp(pp, &env)
    }

    /// Evaluate a boolean combination of p.p. formulas (in particular any
    /// quantifier-free formula) in the module language.
    pub fn eval_formula(&self, f: &Formula, env: &BTreeMap<String, TorsionElement>) -> Result<bool, EvalError> {
        match f {
            Formula::Atom(Atom::Eq(s, t)) => {
                let tau = lin(s)?.add(&lin(t)?.scale(&BigInt::from(-1)));
                Ok(self.combine(&tau, env)?.is_zero())
            }
            Formula::Atom(Atom::Divides { prime, exp, term }) => {
                Ok(self.divisible(&self.combine(&lin(term)?, env)?, *prime, *exp))
            }
            Formula::Atom(Atom::Rel(r, _)) => Err(EvalError::UnknownSymbol(r.clone())),
            Formula::Not(x) => Ok(!self.eval_formula(x, env)?),
            Formula::And(a, b) => Ok(self.eval_formula(a, env)? && self.eval_formula(b, env)?),
            Formula::Or(a, b) => Ok(self.eval_formula(a, env)? || self.eval_formula(b, env)?),
            Formula::Implies(a, b) => Ok(!self.eval_formula(a, env)? || self.eval_formula(b, env)?),
            Formula::Exists(..) | Formula::Forall(..) => match recognize_pp(f) {
                Ok(pp) => self.eval_pp(&pp, env),
                Err(e) => Err(EvalError::Unsupported(format!(
                    "only boolean combinations of p.p. formulas are decidable here ({e})"
                ))),
            },
        }
    }

    /// For finite presentations: the group as a finite structure together
    /// with the element behind each universe index.
    pub fn realize_finite(&self, limit: usize) -> Result<(FiniteStructure, Vec<TorsionElement>), EvalError> {
        let mut slots = Vec::new();
        for (s, summand) in self.summands.iter().enumerate() {
            match summand {
                Summand::Cyclic {
                    p,
                    k,
                    mult: Multiplicity::Finite(m),
                } => {
                    for i in 0..*m {
                        slots.push((s, i, p.pow(*k)));
                    }
                }
                _ => return Err(EvalError::Unsupported("the presentation is infinite".into())),
            }
        }
        let size = slots.iter().try_fold(1usize, |acc, (_, _, q)| acc.checked_mul(*q as usize));
        match size {
            Some(n) if n <= limit => {}
            _ => return Err(EvalError::Unsupported(format!("group larger than {limit} elements"))),
        }
        let moduli: Vec<u64> = slots.iter().map(|(_, _, q)| *q).collect();
        let structure = FiniteStructure::abelian_group(&moduli)?;
        let elements = (0..structure.size())
            .map(|mut idx| {
                let mut entries = Vec::with_capacity(slots.len());
                for (s, i, q) in slots.iter().rev() {
                    let (rest, r) = idx.div_rem(&(*q as usize));
                    idx = rest;
                    entries.push((*s, *i, ComponentValue::Residue(BigUint::from(r))));
                }
                self.element(entries).expect("components exist")
            })
            .collect();
        Ok((structure, elements))
    }
}

fn lin(t: &crate::formula::Term) -> Result<LinComb, EvalError> {
    linearize(t).ok_or_else(|| EvalError::Unsupported(format!("`{t}` is not a module term")))
}

/// The p-part of an order as an exponent, when the order is a power of `p`.
pub fn order_exponent(order: &BigUint, p: u64) -> Option<u32> {
    let v = valuation_u(order, p).unwrap_or(0);
    (pow(p, v) == *order).then_some(v)
}
