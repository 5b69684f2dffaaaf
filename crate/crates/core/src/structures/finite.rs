//! Finite structures with explicit tables and brute-force Tarskian evaluation.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::EvalError;
use crate::formula::{Atom, Formula, Signature, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnTable {
    pub arity: usize,
    /// Row-major over `universe^arity`.
    pub values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelTable {
    pub arity: usize,
    pub holds: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteStructure {
    pub signature: Signature,
    pub universe: Vec<String>,
    pub functions: BTreeMap<String, FnTable>,
    pub relations: BTreeMap<String, RelTable>,
}

pub type Assignment = HashMap<String, usize>;

/// Largest function or relation table a finite structure may carry. A
/// group of order 4096 needs 2^24 entries for its addition table.
pub const MAX_TABLE_ENTRIES: usize = 1 << 24;

fn index_of(args: &[usize], n: usize) -> usize {
    args.iter().fold(0, |acc, a| acc * n + a)
}

/// All tuples of `arity` elements drawn from `0..n`, in row-major order.
pub fn tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.checked_pow(arity as u32).unwrap_or(0);
    (0..total).map(move |mut i| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = i % n;
            i /= n;
        }
        t
    })
}

impl FiniteStructure {
    /// Build from interpretation callbacks; every declared symbol is tabulated.
    pub fn from_fn(
        signature: Signature,
        universe: Vec<String>,
        mut func: impl FnMut(&str, &[usize]) -> usize,
        mut rel: impl FnMut(&str, &[usize]) -> bool,
    ) -> Result<Self, EvalError> {
        if universe.is_empty() {
            return Err(EvalError::Structure("universe is empty".into()));
        }
        if signature.numerals {
            return Err(EvalError::Structure("finite structures cannot interpret all numerals".into()));
        }
        let n = universe.len();
        let arities = signature.functions.iter().chain(&signature.relations);
        if let Some((sym, _)) = arities
            .clone()
            .find(|(_, a)| n.checked_pow(*a as u32).is_none_or(|t| t > MAX_TABLE_ENTRIES))
        {
            return Err(EvalError::Structure(format!(
                "the table of `{sym}` exceeds {MAX_TABLE_ENTRIES} entries"
            )));
        }
        let mut functions = BTreeMap::new();
        for (f, arity) in &signature.functions {
            let values: Vec<usize> = tuples(n, *arity).map(|t| func(f, &t)).collect();
            if let Some(bad) = values.iter().find(|&&v| v >= n) {
                return Err(EvalError::Structure(format!("`{f}` maps outside the universe ({bad})")));
            }
            functions.insert(f.clone(), FnTable { arity: *arity, values });
        }
        let mut relations = BTreeMap::new();
        for (r, arity) in &signature.relations {
            let holds = tuples(n, *arity).map(|t| rel(r, &t)).collect();
            relations.insert(r.clone(), RelTable { arity: *arity, holds });
        }
        let s = FiniteStructure {
            signature,
            universe,
            functions,
            relations,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let n = self.universe.len();
        if n == 0 {
            return Err(EvalError::Structure("universe is empty".into()));
        }
        for (f, arity) in &self.signature.functions {
            let t = self
                .functions
                .get(f)
                .ok_or_else(|| EvalError::Structure(format!("no table for `{f}`")))?;
            if t.arity != *arity || t.values.len() != n.pow(*arity as u32) || t.values.iter().any(|&v| v >= n) {
                return Err(EvalError::Structure(format!("table for `{f}` is not total and closed")));
            }
        }
        for (r, arity) in &self.signature.relations {
            let t = self
                .relations
                .get(r)
                .ok_or_else(|| EvalError::Structure(format!("no table for `{r}`")))?;
            if t.arity != *arity || t.holds.len() != n.pow(*arity as u32) {
                return Err(EvalError::Structure(format!("table for `{r}` has the wrong shape")));
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn element(&self, token: &str) -> Option<usize> {
        self.universe.iter().position(|u| u == token)
    }

    pub fn apply(&self, f: &str, args: &[usize]) -> Option<usize> {
        let t = self.functions.get(f)?;
        Some(t.values[index_of(args, self.size())])
    }

    pub fn holds(&self, r: &str, args: &[usize]) -> Option<bool> {
        let t = self.relations.get(r)?;
        Some(t.holds[index_of(args, self.size())])
    }

    /// The group `Z_{m1} x ... x Z_{mr}` in the module language. A single
    /// factor also interprets the constant `1`.
    pub fn abelian_group(moduli: &[u64]) -> Result<Self, EvalError> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(EvalError::Structure("moduli must be positive".into()));
        }
        let n = moduli
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(usize::try_from(m).ok()?))
            .filter(|n| n.checked_mul(*n).is_some_and(|t| t <= MAX_TABLE_ENTRIES))
            .ok_or_else(|| EvalError::Structure("the group is too large to tabulate".into()))?;
        let decode = |mut i: usize| -> Vec<u64> {
            let mut v = vec![0; moduli.len()];
            for (slot, m) in v.iter_mut().zip(moduli).rev() {
                *slot = (i % *m as usize) as u64;
                i /= *m as usize;
            }
            v
        };
        let encode = |v: &[u64]| -> usize { v.iter().zip(moduli).fold(0, |acc, (x, m)| acc * *m as usize + *x as usize) };
        let universe = (0..n)
            .map(|i| {
                let v = decode(i);
                if v.len() == 1 {
                    v[0].to_string()
                } else {
                    format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                }
            })
            .collect();
        let single = moduli.len() == 1;
        let signature = if single {
            Signature::cyclic_module()
        } else {
            Signature::module()
        };
        let name = format!(
            "Z_{}",
            moduli.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("+Z_")
        );
        let mut s = Self::from_fn(
            signature,
            universe,
            |f, args| match f {
                "+" => {
                    let (a, b) = (decode(args[0]), decode(args[1]));
                    let sum: Vec<u64> = a.iter().zip(&b).zip(moduli).map(|((x, y), m)| (x + y) % m).collect();
                    encode(&sum)
                }
                "-" => {
                    let a = decode(args[0]);
                    let neg: Vec<u64> = a.iter().zip(moduli).map(|(x, m)| (m - x) % m).collect();
                    encode(&neg)
                }
                "1" => encode(&[1 % moduli[0]]),
                _ => 0,
            },
            |_, _| false,
        )?;
        s.signature.name = name;
        Ok(s)
    }

    pub fn cyclic_group(n: u64) -> Result<Self, EvalError> {
        Self::abelian_group(&[n])
    }

    pub fn eval(&self, f: &Formula, env: &Assignment) -> Result<bool, EvalError> {
        Evaluator::new(self).eval(f, env)
    }

    pub fn eval_term(&self, t: &Term, env: &Assignment) -> Result<usize, EvalError> {
        Evaluator::new(self).term(t, env)
    }

    /// Elements satisfying the one-variable formula `f(var)`.
    pub fn satisfying(&self, f: &Formula, var: &str) -> Result<Vec<usize>, EvalError> {
        let ev = Evaluator::new(self);
        let mut env = Assignment::new();
        let mut out = Vec::new();
        for m in 0..self.size() {
            env.insert(var.to_string(), m);
            if ev.eval(f, &env)? {
                out.push(m);
            }
        }
        Ok(out)
    }
}

/// Brute-force evaluator. Quantifiers range over `domain` (the whole universe
/// by default), which also evaluates formulas in a substructure.
pub struct Evaluator<'a> {
    pub structure: &'a FiniteStructure,
    pub domain: Vec<usize>,
    trace: Option<std::cell::RefCell<Vec<String>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(structure: &'a FiniteStructure) -> Self {
        Evaluator {
            structure,
            domain: (0..structure.size()).collect(),
            trace: None,
        }
    }

    pub fn restricted(structure: &'a FiniteStructure, domain: Vec<usize>) -> Self {
        Evaluator {
            structure,
            domain,
            trace: None,
        }
    }

    pub fn traced(mut self) -> Self {
        self.trace = Some(std::cell::RefCell::new(Vec::new()));
        self
    }

    pub fn take_trace(&self) -> Vec<String> {
        self.trace.as_ref().map(|t| t.borrow().clone()).unwrap_or_default()
    }

    fn note(&self, depth: usize, line: String) {
        if let Some(t) = &self.trace {
            t.borrow_mut().push(format!("{}{line}", "  ".repeat(depth)));
        }
    }

    pub fn term(&self, t: &Term, env: &Assignment) -> Result<usize, EvalError> {
        let m = self.structure;
        match t {
            Term::Var(v) => env.get(v).copied().ok_or_else(|| EvalError::Unbound(v.clone())),
            Term::App(f, args) => {
                let vals = args.iter().map(|a| self.term(a, env)).collect::<Result<Vec<_>, _>>()?;
                m.apply(f, &vals).ok_or_else(|| EvalError::UnknownSymbol(f.clone()))
            }
            Term::Scalar(k, t) => {
                let v = self.term(t, env)?;
                self.scalar(k, v)
            }
        }
    }

    /// `k*v` by double-and-add over the `+` table.
    fn scalar(&self, k: &BigInt, v: usize) -> Result<usize, EvalError> {
        let m = self.structure;
        let add = |a: usize, b: usize| m.apply("+", &[a, b]).ok_or(EvalError::NoModuleStructure);
        let zero = m.apply("0", &[]).ok_or(EvalError::NoModuleStructure)?;
        let base = if k.is_negative() {
            m.apply("-", &[v]).ok_or(EvalError::NoModuleStructure)?
        } else {
            v
        };
        let mut n = k.abs();
        let mut acc = zero;
        let mut pow = base;
        let two = BigInt::from(2);
        while !n.is_zero() {
            if (&n % &two).to_u8() == Some(1) {
                acc = add(acc, pow)?;
            }
            pow = add(pow, pow)?;
            n /= &two;
        }
        Ok(acc)
    }

    pub fn eval(&self, f: &Formula, env: &Assignment) -> Result<bool, EvalError> {
        let mut env = env.clone();
        self.go(f, &mut env, 0)
    }

    fn go(&self, f: &Formula, env: &mut Assignment, depth: usize) -> Result<bool, EvalError> {
        match f {
            Formula::Atom(a) => self.atom(a, env),
            Formula::Not(x) => Ok(!self.go(x, env, depth)?),
            Formula::And(a, b) => Ok(self.go(a, env, depth)? && self.go(b, env, depth)?),
            Formula::Or(a, b) => Ok(self.go(a, env, depth)? || self.go(b, env, depth)?),
            Formula::Implies(a, b) => Ok(!self.go(a, env, depth)? || self.go(b, env, depth)?),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let universal = matches!(f, Formula::Forall(..));
                let saved = env.get(v).copied();
                let mut result = universal;
                for &m in &self.domain {
                    env.insert(v.clone(), m);
                    let r = self.go(body, env, depth + 1)?;
                    if r != universal {
                        let what = if universal { "counterexample" } else { "witness" };
                        self.note(depth, format!("{v} = {}: {what}", self.structure.universe[m]));
                        result = !universal;
                        break;
                    }
                }
                if result == universal {
                    let what = if universal { "all values satisfy" } else { "no witness" };
                    self.note(depth, format!("{v}: {what}"));
                }
                match saved {
                    Some(s) => env.insert(v.clone(), s),
                    None => env.remove(v),
                };
                Ok(result)
            }
        }
    }

    fn atom(&self, a: &Atom, env: &Assignment) -> Result<bool, EvalError> {
        match a {
            Atom::Eq(s, t) => Ok(self.term(s, env)? == self.term(t, env)?),
            Atom::Rel(r, args) => {
                let vals = args.iter().map(|t| self.term(t, env)).collect::<Result<Vec<_>, _>>()?;
                self.structure
                    .holds(r, &vals)
                    .ok_or_else(|| EvalError::UnknownSymbol(r.clone()))
            }
            Atom::Divides { prime, exp, term } => {
                let target = self.term(term, env)?;
                let k = BigInt::from(Atom::divisor(*prime, *exp));
                for &y in &self.domain {
                    if self.scalar(&k, y)? == target {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}
