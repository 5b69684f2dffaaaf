//! Closed-form descriptions of sequences `f in prod M_i`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::UltraError;
use crate::arith::pow;
use crate::structures::{Affine, Component, ComponentValue, StructureHandle, Summand, Value};

/// The value of a sequence outside its exceptional indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    Const(Value),
    /// `n -> a*n + b` in the naturals.
    AffineNat { a: BigInt, b: BigInt },
    /// `n -> a*c^n + d` in the naturals.
    GeometricNat { a: BigInt, c: BigUint, d: BigInt },
    /// In component `n` of a torsion summand: `coefficient * p^max(k - j(n), 0)`
    /// for a cyclic component `Z_{p^k}`, or `coefficient / p^max(j(n), 0)` for a
    /// Prufer component.
    TailUnit {
        summand: usize,
        offset: Affine,
        coefficient: BigInt,
    },
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Const(v) => write!(f, "const {v}"),
            Tail::AffineNat { a, b } => write!(f, "n -> {a}*n + {b}"),
            Tail::GeometricNat { a, c, d } => write!(f, "n -> {a}*{c}^n + {d}"),
            Tail::TailUnit {
                summand,
                offset,
                coefficient,
            } => write!(f, "n -> {coefficient} * unit(summand {summand}, component n, offset {offset})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinableSequence {
    pub exceptions: BTreeMap<u64, Value>,
    pub tail: Tail,
}

impl fmt::Display for DefinableSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tail)?;
        if !self.exceptions.is_empty() {
            let ex: Vec<String> = self.exceptions.iter().map(|(n, v)| format!("{n}: {v}")).collect();
            write!(f, " except {{{}}}", ex.join(", "))?;
        }
        Ok(())
    }
}

fn nat(v: BigInt, n: u64) -> Result<Value, UltraError> {
    v.to_biguint()
        .map(Value::Nat)
        .ok_or_else(|| UltraError::Sequence(format!("negative value {v} at index {n}")))
}

impl DefinableSequence {
    pub fn constant(v: Value) -> Self {
        DefinableSequence {
            exceptions: BTreeMap::new(),
            tail: Tail::Const(v),
        }
    }

    pub fn new(tail: Tail) -> Self {
        DefinableSequence {
            exceptions: BTreeMap::new(),
            tail,
        }
    }

    pub fn with_exception(mut self, n: u64, v: Value) -> Self {
        self.exceptions.insert(n, v);
        self
    }

    /// A sequence over a finite index set, given by all its values.
    pub fn listed(values: Vec<Value>) -> Self {
        let tail = Tail::Const(values.first().cloned().unwrap_or(Value::Elem(0)));
        DefinableSequence {
            exceptions: values.into_iter().enumerate().map(|(i, v)| (i as u64, v)).collect(),
            tail,
        }
    }

    pub fn affine(a: i64, b: i64) -> Self {
        Self::new(Tail::AffineNat {
            a: a.into(),
            b: b.into(),
        })
    }

    pub fn geometric(a: i64, c: u64, d: i64) -> Self {
        Self::new(Tail::GeometricNat {
            a: a.into(),
            c: c.into(),
            d: d.into(),
        })
    }

    pub fn tail_unit(summand: usize, offset: Affine, coefficient: i64) -> Self {
        Self::new(Tail::TailUnit {
            summand,
            offset,
            coefficient: coefficient.into(),
        })
    }

    /// First index beyond every exception.
    pub fn regular_from(&self) -> u64 {
        self.exceptions.keys().next_back().map_or(0, |n| n + 1)
    }

    /// The tail's value at `n` in `member` (ignoring exceptions).
    pub fn tail_at(&self, n: u64, member: &StructureHandle) -> Result<Value, UltraError> {
        match &self.tail {
            Tail::Const(v) => Ok(v.clone()),
            Tail::AffineNat { a, b } => nat(a * BigInt::from(n) + b, n),
            Tail::GeometricNat { a, c, d } => {
                let e = u32::try_from(n).map_err(|_| UltraError::Sequence("index too large".into()))?;
                nat(a * BigInt::from(c.pow(e)) + d, n)
            }
            Tail::TailUnit {
                summand,
                offset,
                coefficient,
            } => {
                let StructureHandle::Torsion(g) = member else {
                    return Err(UltraError::Sequence("unit tails live in torsion groups".into()));
                };
                let comp = g.component(*summand, n)?;
                let j = offset.at(n);
                let value = match comp {
                    Component::Cyclic { p, k } => {
                        let e = (k as i128 - j).max(0) as u32;
                        let m = pow(p, k);
                        ComponentValue::Residue(crate::arith::modulo(&(coefficient * BigInt::from(pow(p, e))), &m))
                    }
                    Component::Prufer { p } => {
                        let e = u32::try_from(j.max(0)).map_err(|_| UltraError::Sequence("offset too large".into()))?;
                        ComponentValue::Fraction {
                            num: crate::arith::modulo(coefficient, &pow(p, e)),
                            exp: e,
                        }
                    }
                };
                Ok(Value::Tor(g.element(vec![(*summand, n, value)])?))
            }
        }
    }

    pub fn at(&self, n: u64, member: &StructureHandle) -> Result<Value, UltraError> {
        match self.exceptions.get(&n) {
            Some(v) => Ok(v.clone()),
            None => self.tail_at(n, member),
        }
    }

    /// Check that the tail is well formed for the member kind and that it
    /// yields valid elements at every non-exceptional index.
    pub fn validate_tail(&self, member: &StructureHandle) -> Result<(), UltraError> {
        let first_regular = |from: u64| (from..).find(|n| !self.exceptions.contains_key(n)).expect("finitely many");
        match (&self.tail, member) {
            (Tail::Const(v), m) => check_value(v, m),
            (Tail::AffineNat { a, .. }, StructureHandle::Naturals(_)) => {
                if a.is_negative() {
                    return Err(UltraError::Sequence("affine tails must be non-decreasing".into()));
                }
                self.tail_at(first_regular(0), member).map(|_| ())
            }
            (Tail::GeometricNat { a, .. }, StructureHandle::Naturals(_)) => {
                if a.is_negative() {
                    return Err(UltraError::Sequence("geometric tails need a >= 0".into()));
                }
                // Non-decreasing from index 1 on; index 0 is special when c = 0.
                self.tail_at(first_regular(0), member)?;
                self.tail_at(first_regular(1), member).map(|_| ())
            }
            (Tail::TailUnit { summand, .. }, StructureHandle::Torsion(g)) => {
                let s = g
                    .summands
                    .get(*summand)
                    .ok_or_else(|| UltraError::Sequence(format!("no summand {summand}")))?;
                let infinite = matches!(s, Summand::Tail { .. })
                    || s.multiplicity() == crate::structures::Multiplicity::Omega;
                if !infinite {
                    return Err(UltraError::Sequence("unit tails need a summand with omega components".into()));
                }
                Ok(())
            }
            (t, _) => Err(UltraError::Sequence(format!("tail `{t}` does not fit this structure"))),
        }
    }

    /// An equivalent sequence with degenerate tails simplified to constants.
    pub fn canonical(&self) -> DefinableSequence {
        let mut out = self.clone();
        match &self.tail {
            Tail::AffineNat { a, b } if a.is_zero() => {
                out.tail = Tail::Const(Value::Nat(b.to_biguint().unwrap_or_default()));
            }
            Tail::GeometricNat { a, d, .. } if a.is_zero() => {
                out.tail = Tail::Const(Value::Nat(d.to_biguint().unwrap_or_default()));
            }
            Tail::GeometricNat { a, c, d } if c.is_one() => {
                out.tail = Tail::Const(Value::Nat((a + d).to_biguint().unwrap_or_default()));
            }
            Tail::GeometricNat { a, c, d } if c.is_zero() => {
                out.exceptions.entry(0).or_insert_with(|| Value::Nat((a + d).to_biguint().unwrap_or_default()));
                out.tail = Tail::Const(Value::Nat(d.to_biguint().unwrap_or_default()));
            }
            _ => {}
        }
        out
    }
}

pub(crate) fn check_value(v: &Value, m: &StructureHandle) -> Result<(), UltraError> {
    match (v, m) {
        (Value::Elem(i), StructureHandle::Finite(s)) if *i < s.size() => Ok(()),
        (Value::Nat(_), StructureHandle::Naturals(_)) => Ok(()),
        (Value::Tor(g), StructureHandle::Torsion(t)) => t.check(g).map_err(UltraError::from),
        _ => Err(UltraError::Sequence(format!("value {v} does not belong to the structure"))),
    }
}

/// Apply a function symbol of the structure to values.
pub fn apply_op(member: &StructureHandle, op: &str, args: &[Value]) -> Result<Value, UltraError> {
    let bad = || UltraError::Sequence(format!("cannot apply `{op}` to {} argument(s) here", args.len()));
    match member {
        StructureHandle::Finite(m) => {
            let idx = args
                .iter()
                .map(|a| match a {
                    Value::Elem(i) if *i < m.size() => Ok(*i),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if m.signature.function_arity(op) != Some(args.len()) {
                return Err(bad());
            }
            m.apply(op, &idx).map(Value::Elem).ok_or_else(bad)
        }
        StructureHandle::Naturals(_) => match (op, args) {
            ("+", [Value::Nat(a), Value::Nat(b)]) => Ok(Value::Nat(a + b)),
            ("mul", [Value::Nat(a), Value::Nat(b)]) => Ok(Value::Nat(a * b)),
            _ => Err(bad()),
        },
        StructureHandle::Torsion(g) => match (op, args) {
            ("+", [Value::Tor(a), Value::Tor(b)]) => Ok(Value::Tor(g.add(a, b))),
            ("-", [Value::Tor(a)]) => Ok(Value::Tor(g.neg(a))),
            ("0", []) => Ok(Value::Tor(crate::structures::TorsionElement::zero())),
            _ => Err(bad()),
        },
    }
}

/// The tail of the pointwise image `op(f, g)`, when the closed-form algebra
/// can express it, together with the first index from which the combined
/// closed form agrees with the pointwise image.
pub fn combine_tails(op: &str, f: &Tail, g: &Tail, member: &StructureHandle) -> Option<(Tail, u64)> {
    use Tail::*;
    if let (
        "+",
        TailUnit {
            summand: s1,
            offset: o1,
            coefficient: c1,
        },
        TailUnit {
            summand: s2,
            offset: o2,
            coefficient: c2,
        },
    ) = (op, f, g)
    {
        if s1 == s2 && o1.a == o2.a && o1.b != o2.b {
            return merge_units(*s1, (*o1, c1), (*o2, c2), member);
        }
    }
    let tail = match (op, f, g) {
        (_, Const(a), Const(b)) => apply_op(member, op, &[a.clone(), b.clone()]).ok().map(Const),
        ("+", Const(Value::Nat(c)), AffineNat { a, b }) | ("+", AffineNat { a, b }, Const(Value::Nat(c))) => {
            Some(AffineNat {
                a: a.clone(),
                b: b + BigInt::from(c.clone()),
            })
        }
        ("+", AffineNat { a: a1, b: b1 }, AffineNat { a: a2, b: b2 }) => Some(AffineNat {
            a: a1 + a2,
            b: b1 + b2,
        }),
        ("+", Const(Value::Nat(k)), GeometricNat { a, c, d }) | ("+", GeometricNat { a, c, d }, Const(Value::Nat(k))) => {
            Some(GeometricNat {
                a: a.clone(),
                c: c.clone(),
                d: d + BigInt::from(k.clone()),
            })
        }
        ("+", GeometricNat { a: a1, c: c1, d: d1 }, GeometricNat { a: a2, c: c2, d: d2 }) if c1 == c2 => {
            Some(GeometricNat {
                a: a1 + a2,
                c: c1.clone(),
                d: d1 + d2,
            })
        }
        ("mul", Const(Value::Nat(k)), AffineNat { a, b }) | ("mul", AffineNat { a, b }, Const(Value::Nat(k))) => {
            let k = BigInt::from(k.clone());
            Some(AffineNat { a: a * &k, b: b * &k })
        }
        ("mul", Const(Value::Nat(k)), GeometricNat { a, c, d })
        | ("mul", GeometricNat { a, c, d }, Const(Value::Nat(k))) => {
            let k = BigInt::from(k.clone());
            Some(GeometricNat {
                a: a * &k,
                c: c.clone(),
                d: d * &k,
            })
        }
        (
            "+",
            TailUnit {
                summand: s1,
                offset: o1,
                coefficient: c1,
            },
            TailUnit {
                summand: s2,
                offset: o2,
                coefficient: c2,
            },
        ) if s1 == s2 && o1 == o2 => Some(TailUnit {
            summand: *s1,
            offset: *o1,
            coefficient: c1 + c2,
        }),
        ("+", Const(Value::Tor(z)), t @ TailUnit { .. }) | ("+", t @ TailUnit { .. }, Const(Value::Tor(z)))
            if z.is_zero() =>
        {
            Some(t.clone())
        }
        _ => None,
    }?;
    Some((tail, 0))
}

/// `c1*u(j1) + c2*u(j2)` for offsets of equal slope: with `d = j2 - j1 > 0`
/// this is `(c1*p^d + c2)*u(j2)` wherever neither offset is clipped.
fn merge_units(
    summand: usize,
    x: (Affine, &BigInt),
    y: (Affine, &BigInt),
    member: &StructureHandle,
) -> Option<(Tail, u64)> {
    let ((lo, c_lo), (hi, c_hi)) = if x.0.b < y.0.b { (x, y) } else { (y, x) };
    let StructureHandle::Torsion(g) = member else { return None };
    let s = g.summands.get(summand)?;
    let d = u32::try_from(hi.b - lo.b).ok()?;
    let a = lo.a;
    // First n >= 0 with slope*n + intercept >= 0.
    let nonnegative_from = |slope: i64, intercept: i64| -> Option<u64> {
        if intercept >= 0 {
            Some(0)
        } else if slope > 0 {
            Some(((-intercept) as u64).div_ceil(slope as u64))
        } else {
            None
        }
    };
    let from = match s {
        // Needs hi(n) <= k for every n.
        Summand::Cyclic { k, .. } => (a == 0 && hi.b <= *k as i64).then_some(0)?,
        // Needs hi(n) <= h(n).
        Summand::Tail { h, .. } => nonnegative_from(h.a - a, h.b - hi.b)?,
        // Needs lo(n) >= 0.
        Summand::Prufer { .. } => nonnegative_from(a, lo.b)?,
    };
    let coefficient = c_lo * BigInt::from(pow(s.prime(), d)) + c_hi;
    Some((
        Tail::TailUnit {
            summand,
            offset: hi,
            coefficient,
        },
        from,
    ))
}

/// The unary image `op(f)` of a tail.
pub fn map_tail(op: &str, f: &Tail, member: &StructureHandle) -> Option<Tail> {
    match (op, f) {
        (_, Tail::Const(a)) => apply_op(member, op, std::slice::from_ref(a)).ok().map(Tail::Const),
        (
            "-",
            Tail::TailUnit {
                summand,
                offset,
                coefficient,
            },
        ) => Some(Tail::TailUnit {
            summand: *summand,
            offset: *offset,
            coefficient: -coefficient,
        }),
        _ => None,
    }
}
