//! JSON documents for structures, contexts, sequences and element literals.
//!
//! Structures:
//! * `{"kind":"finite","signature":{..},"universe":[..],"functions":{"f":[row-major outputs]},"relations":{"R":[[tuple], ..]}}`
//! * `{"kind":"finite_abelian","moduli":[2,4]}`
//! * `{"kind":"torsion","summands":[{"type":"cyclic","p":2,"k":3,"mult":1}, ..]}`
//! * `{"kind":"naturals"}`
//!
//! Contexts: `{"family":{..},"ultrafilter":{"kind":"principal","atom":0} | {"kind":"frechet"},"gamma":[..]}`
//! where the family is `{"kind":"finite","members":[structures]}`,
//! `{"kind":"constant_power","structure":{..}}` or
//! `{"kind":"tail_power","p":2,"h":{"a":1,"b":1}}`, and each type is
//! `{"name":"p","var":"x","formulas":[..]}` or `{"tor":depth}`.
//!
//! Sequences: `{"values":[..]}` or `{"exceptions":{"3":v},"tail":{"kind":..}}`
//! with tails `const`, `affine`, `geometric` and `unit`. Element literals are
//! universe names (finite), numbers (naturals) or lists of
//! `[summand, component, value]` triples (torsion, Prufer values `"a/p^k"`).

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use crate::formula::{parse_formula, FormulaError, Signature, UnaryTypePresentation};
use crate::structures::{
    Affine, ComponentValue, EvalError, FiniteStructure, NatModel, StructureHandle, Summand, TorsionGroup, Value,
};
use crate::ultraproduct::{DefinableSequence, Family, GammaContext, Tail, UltraError, UltrafilterDescriptor};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Ultra(#[from] UltraError),
}

fn invalid(msg: impl Into<String>) -> IoError {
    IoError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureDoc {
    Finite {
        signature: Signature,
        universe: Vec<String>,
        #[serde(default)]
        functions: BTreeMap<String, Vec<String>>,
        #[serde(default)]
        relations: BTreeMap<String, Vec<Vec<String>>>,
    },
    FiniteAbelian {
        moduli: Vec<u64>,
    },
    Torsion {
        summands: Vec<Summand>,
    },
    Naturals,
}

impl StructureDoc {
    pub fn build(&self) -> Result<StructureHandle, IoError> {
        match self {
            StructureDoc::Finite {
                signature,
                universe,
                functions,
                relations,
            } => {
                signature.validate()?;
                let mut names = std::collections::HashSet::new();
                if let Some(dup) = universe.iter().find(|u| !names.insert(u.as_str())) {
                    return Err(invalid(format!("duplicate element `{dup}`")));
                }
                let idx = |name: &str| {
                    universe
                        .iter()
                        .position(|u| u == name)
                        .ok_or_else(|| invalid(format!("unknown element `{name}`")))
                };
                let mut fn_tables = BTreeMap::new();
                for (f, arity) in &signature.functions {
                    let rows = functions
                        .get(f)
                        .ok_or_else(|| invalid(format!("no table for `{f}`")))?;
                    let expected = universe.len().checked_pow(*arity as u32).ok_or_else(|| invalid("table too large"))?;
                    if rows.len() != expected {
                        return Err(invalid(format!("`{f}` needs {expected} entries, found {}", rows.len())));
                    }
                    let values = rows.iter().map(|r| idx(r)).collect::<Result<Vec<_>, _>>()?;
                    fn_tables.insert(f.clone(), values);
                }
                if let Some(f) = functions.keys().find(|f| signature.function_arity(f).is_none()) {
                    return Err(invalid(format!("table for undeclared function `{f}`")));
                }
                let mut rel_tables = BTreeMap::new();
                for (r, arity) in &signature.relations {
                    let mut holds = std::collections::HashSet::new();
                    for t in relations.get(r).map(Vec::as_slice).unwrap_or_default() {
                        if t.len() != *arity {
                            return Err(invalid(format!("tuple of `{r}` has length {}", t.len())));
                        }
                        holds.insert(t.iter().map(|e| idx(e)).collect::<Result<Vec<_>, _>>()?);
                    }
                    rel_tables.insert(r.clone(), holds);
                }
                if let Some(r) = relations.keys().find(|r| !signature.relations.iter().any(|(s, _)| s == *r)) {
                    return Err(invalid(format!("tuples for undeclared relation `{r}`")));
                }
                let n = universe.len();
                let m = FiniteStructure::from_fn(
                    signature.clone(),
                    universe.clone(),
                    |f, args| fn_tables[f][args.iter().fold(0, |acc, a| acc * n + a)],
                    |r, args| rel_tables[r].contains(args),
                )?;
                Ok(StructureHandle::Finite(m))
            }
            StructureDoc::FiniteAbelian { moduli } => Ok(StructureHandle::Finite(FiniteStructure::abelian_group(moduli)?)),
            StructureDoc::Torsion { summands } => Ok(StructureHandle::Torsion(TorsionGroup::new(summands.clone())?)),
            StructureDoc::Naturals => Ok(StructureHandle::Naturals(NatModel)),
        }
    }

    /// The document describing a finite structure table by table.
    pub fn from_finite(m: &FiniteStructure) -> Self {
        let name = |i: &usize| m.universe[*i].clone();
        StructureDoc::Finite {
            signature: m.signature.clone(),
            universe: m.universe.clone(),
            functions: m
                .functions
                .iter()
                .map(|(f, t)| (f.clone(), t.values.iter().map(name).collect()))
                .collect(),
            relations: m
                .relations
                .iter()
                .map(|(r, t)| {
                    let tuples = crate::structures::tuples(m.size(), t.arity)
                        .zip(&t.holds)
                        .filter(|(_, &h)| h)
                        .map(|(tuple, _)| tuple.iter().map(name).collect())
                        .collect();
                    (r.clone(), tuples)
                })
                .collect(),
        }
    }
}

pub fn parse_structure(text: &str) -> Result<StructureHandle, IoError> {
    serde_json::from_str::<StructureDoc>(text)?.build()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyDoc {
    Finite { members: Vec<StructureDoc> },
    ConstantPower { structure: StructureDoc },
    TailPower { p: u64, h: Affine },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UltrafilterDoc {
    Principal { atom: usize },
    Frechet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum TypeDoc {
    Tor { tor: usize },
    Listed { name: String, var: String, formulas: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextDoc {
    pub family: FamilyDoc,
    pub ultrafilter: UltrafilterDoc,
    #[serde(default)]
    pub gamma: Vec<TypeDoc>,
    /// Accept finite members that realize a truncated type.
    #[serde(default)]
    pub allow_realizations: bool,
}

impl ContextDoc {
    pub fn build(&self) -> Result<GammaContext, IoError> {
        let family = match &self.family {
            FamilyDoc::Finite { members } => Family::Finite(members.iter().map(StructureDoc::build).collect::<Result<_, _>>()?),
            FamilyDoc::ConstantPower { structure } => Family::ConstantPower(structure.build()?),
            FamilyDoc::TailPower { p, h } => Family::tail_power(*p, *h)?,
        };
        let ultrafilter = match (&self.ultrafilter, family.size()) {
            (UltrafilterDoc::Principal { atom }, Some(size)) => UltrafilterDescriptor::Principal { size, atom: *atom },
            (UltrafilterDoc::Principal { .. }, None) => return Err(invalid("principal ultrafilters need a finite family")),
            (UltrafilterDoc::Frechet, _) => UltrafilterDescriptor::Frechet,
        };
        let sig = match &family {
            Family::Finite(ms) => ms.first().ok_or_else(|| invalid("empty family"))?.signature(),
            Family::ConstantPower(m) => m.signature(),
            Family::TailPower { .. } => Signature::module(),
        };
        let gamma = self
            .gamma
            .iter()
            .map(|t| match t {
                TypeDoc::Tor { tor } => Ok(UnaryTypePresentation::tor(*tor)),
                TypeDoc::Listed { name, var, formulas } => {
                    let fs = formulas.iter().map(|f| parse_formula(f, &sig)).collect::<Result<_, _>>()?;
                    Ok(UnaryTypePresentation::listed(name, var, fs)?)
                }
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(if self.allow_realizations {
            GammaContext::allowing_realizations(family, ultrafilter, gamma)?
        } else {
            GammaContext::new(family, ultrafilter, gamma)?
        })
    }
}

pub fn parse_context(text: &str) -> Result<GammaContext, IoError> {
    serde_json::from_str::<ContextDoc>(text)?.build()
}

/// A Prufer value `"a/p^k"` (the base must be the component's prime) or a
/// residue.
fn component_value(v: &Json, prime: u64) -> Result<ComponentValue, IoError> {
    match v {
        Json::Number(n) => n
            .as_u64()
            .map(|r| ComponentValue::Residue(r.into()))
            .ok_or_else(|| invalid(format!("residue {n} is not a natural number"))),
        Json::String(s) => {
            let (num, den) = s.split_once('/').ok_or_else(|| invalid(format!("bad fraction `{s}`")))?;
            let (base, exp) = den.split_once('^').ok_or_else(|| invalid(format!("bad denominator `{den}`")))?;
            if base.trim().parse::<u64>().ok() != Some(prime) {
                return Err(invalid(format!("`{s}` is not a fraction over {prime}")));
            }
            let num: BigUint = num.trim().parse().map_err(|_| invalid(format!("bad numerator `{num}`")))?;
            let exp: u32 = exp.trim().parse().map_err(|_| invalid(format!("bad exponent `{exp}`")))?;
            Ok(ComponentValue::Fraction { num, exp })
        }
        other => Err(invalid(format!("bad component value {other}"))),
    }
}

/// An element literal for `member`.
pub fn parse_value(v: &Json, member: &StructureHandle) -> Result<Value, IoError> {
    match member {
        StructureHandle::Finite(m) => {
            let name = match v {
                Json::String(s) => s.clone(),
                Json::Number(n) => n.to_string(),
                other => return Err(invalid(format!("bad element {other}"))),
            };
            m.element(&name)
                .map(Value::Elem)
                .ok_or_else(|| invalid(format!("`{name}` is not in the universe")))
        }
        StructureHandle::Naturals(_) => match v {
            Json::Number(n) => n.as_u64().map(|n| Value::Nat(n.into())).ok_or_else(|| invalid("not a natural number")),
            Json::String(s) => s.parse().map(Value::Nat).map_err(|_| invalid(format!("bad natural `{s}`"))),
            other => Err(invalid(format!("bad natural {other}"))),
        },
        StructureHandle::Torsion(g) => {
            let triples = v.as_array().ok_or_else(|| invalid("torsion elements are lists of triples"))?;
            let mut entries = Vec::new();
            for t in triples {
                let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(|| invalid("expected [summand, component, value]"))?;
                let s = t[0].as_u64().ok_or_else(|| invalid("bad summand index"))? as usize;
                let c = t[1].as_u64().ok_or_else(|| invalid("bad component index"))?;
                let prime = g.component(s, c)?.prime();
                entries.push((s, c, component_value(&t[2], prime)?));
            }
            Ok(Value::Tor(g.element(entries)?))
        }
    }
}

fn big_int(v: &Json, field: &str) -> Result<BigInt, IoError> {
    match v {
        Json::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| invalid(format!("`{field}` must be an integer"))),
        Json::String(s) => s.parse().map_err(|_| invalid(format!("`{field}` must be an integer"))),
        _ => Err(invalid(format!("`{field}` must be an integer"))),
    }
}

/// A sequence literal, with element literals read in the family's members.
pub fn parse_sequence(v: &Json, family: &Family) -> Result<DefinableSequence, IoError> {
    let obj = v.as_object().ok_or_else(|| invalid("sequences are JSON objects"))?;
    if let Some(values) = obj.get("values") {
        let values = values.as_array().ok_or_else(|| invalid("`values` must be a list"))?;
        let listed = values
            .iter()
            .enumerate()
            .map(|(i, x)| parse_value(x, family.member(i as u64)?))
            .collect::<Result<Vec<_>, _>>()?;
        if listed.is_empty() {
            return Err(invalid("`values` is empty"));
        }
        return Ok(DefinableSequence::listed(listed));
    }
    let tail = obj.get("tail").ok_or_else(|| invalid("a sequence needs `values` or `tail`"))?;
    let kind = tail.get("kind").and_then(Json::as_str).ok_or_else(|| invalid("tails need a `kind`"))?;
    let field = |name: &str| tail.get(name).ok_or_else(|| invalid(format!("tail `{kind}` needs `{name}`")));
    let tail = match kind {
        "const" => Tail::Const(parse_value(field("value")?, family.member(0)?)?),
        "affine" => Tail::AffineNat {
            a: big_int(field("a")?, "a")?,
            b: big_int(field("b")?, "b")?,
        },
        "geometric" => Tail::GeometricNat {
            a: big_int(field("a")?, "a")?,
            c: big_int(field("c")?, "c")?
                .to_biguint()
                .ok_or_else(|| invalid("`c` must be non-negative"))?,
            d: big_int(field("d")?, "d")?,
        },
        "unit" => Tail::TailUnit {
            summand: field("summand")?.as_u64().ok_or_else(|| invalid("bad summand"))? as usize,
            offset: serde_json::from_value(field("offset")?.clone())?,
            coefficient: tail.get("coefficient").map_or(Ok(BigInt::from(1)), |c| big_int(c, "coefficient"))?,
        },
        other => return Err(invalid(format!("unknown tail kind `{other}`"))),
    };
    let mut seq = DefinableSequence::new(tail);
    if let Some(ex) = obj.get("exceptions") {
        let ex = ex.as_object().ok_or_else(|| invalid("`exceptions` must be an object"))?;
        for (k, x) in ex {
            let n: u64 = k.parse().map_err(|_| invalid(format!("bad index `{k}`")))?;
            seq = seq.with_exception(n, parse_value(x, family.member(n)?)?);
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn finite_structures_round_trip() {
        let m = crate::catalog::escape_structure();
        let doc = StructureDoc::from_finite(&m);
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(parse_structure(&text).unwrap(), StructureHandle::Finite(m));
    }

    #[test]
    fn torsion_documents() {
        let text = r#"{"kind":"torsion","summands":[{"type":"cyclic","p":2,"k":3,"mult":1},{"type":"prufer","p":2,"mult":"omega"},{"type":"tail","p":2,"h":{"a":1,"b":0}}]}"#;
        let StructureHandle::Torsion(g) = parse_structure(text).unwrap() else { panic!() };
        assert_eq!(g.summands.len(), 3);
        let v = parse_value(&json!([[0, 0, 3], [1, 5, "1/2^2"]]), &StructureHandle::Torsion(g.clone())).unwrap();
        let Value::Tor(e) = v else { panic!() };
        assert_eq!(g.order_of(&e), BigUint::from(8u32));
        assert!(parse_value(&json!([[1, 0, "1/3^2"]]), &StructureHandle::Torsion(g)).is_err());
    }

    #[test]
    fn bad_documents_are_rejected() {
        assert!(parse_structure(r#"{"kind":"finite_abelian","moduli":[0]}"#).is_err());
        assert!(parse_structure(r#"{"kind":"torsion","summands":[{"type":"cyclic","p":4,"k":1,"mult":1}]}"#).is_err());
        assert!(parse_structure(r#"{"kind":"nope"}"#).is_err());
        assert!(parse_structure("[").is_err());
    }

    #[test]
    fn contexts_and_sequences() {
        let text = r#"{"family":{"kind":"constant_power","structure":{"kind":"naturals"}},
            "ultrafilter":{"kind":"frechet"},
            "gamma":[{"name":"two_adic","var":"x","formulas":["(2^1 | x) & ~(x = 0)","(2^2 | x) & ~(x = 0)"]}]}"#;
        let ctx = parse_context(text).unwrap();
        assert_eq!(ctx.gamma.len(), 1);
        let f = parse_sequence(&json!({"tail":{"kind":"geometric","a":1,"c":2,"d":-1},"exceptions":{"0":5}}), &ctx.family).unwrap();
        assert_eq!(f, DefinableSequence::geometric(1, 2, -1).with_exception(0, Value::Nat(5u32.into())));
        let tor = parse_context(r#"{"family":{"kind":"tail_power","p":2,"h":{"a":1,"b":1}},"ultrafilter":{"kind":"frechet"},"gamma":[{"tor":4}]}"#).unwrap();
        let u = parse_sequence(&json!({"tail":{"kind":"unit","summand":0,"offset":{"a":0,"b":1}}}), &tor.family).unwrap();
        assert_eq!(u, crate::catalog::order_two_sequence());
        assert!(parse_context(r#"{"family":{"kind":"tail_power","p":2,"h":{"a":1,"b":1}},"ultrafilter":{"kind":"principal","atom":0}}"#).is_err());
    }
}
