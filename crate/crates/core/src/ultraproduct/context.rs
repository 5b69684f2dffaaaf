//! The data of a Γ-ultraproduct: a family of structures, an ultrafilter on
//! its index set, and the presented types.

use super::filter::UltrafilterDescriptor;
use super::sequence::{check_value, DefinableSequence};
use super::UltraError;
use crate::formula::{negate, UnaryTypePresentation};
use crate::structures::{Affine, FiniteStructure, StructureHandle, Summand, TorsionGroup, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `M_0, ..., M_{n-1}`.
    Finite(Vec<StructureHandle>),
    /// `M_n = M` for every `n < omega`.
    ConstantPower(StructureHandle),
    /// `M_n = Z_{p^{h(n)}}`, realized as component `n` of the tail summand
    /// of `group` (a torsion handle with that single summand).
    TailPower { p: u64, h: Affine, group: StructureHandle },
}

impl Family {
    pub fn tail_power(p: u64, h: Affine) -> Result<Self, UltraError> {
        let group = StructureHandle::Torsion(TorsionGroup::new(vec![Summand::Tail { p, h }])?);
        Ok(Family::TailPower { p, h, group })
    }

    /// Number of indices, `None` for omega.
    pub fn size(&self) -> Option<usize> {
        match self {
            Family::Finite(ms) => Some(ms.len()),
            _ => None,
        }
    }

    /// The structure at index `n`; for tail powers, the ambient group in
    /// which component `n` is `Z_{p^{h(n)}}`.
    pub fn member(&self, n: u64) -> Result<&StructureHandle, UltraError> {
        match self {
            Family::Finite(ms) => ms
                .get(n as usize)
                .ok_or_else(|| UltraError::Context(format!("no index {n} in a family of {}", ms.len()))),
            Family::ConstantPower(m) => Ok(m),
            Family::TailPower { group, .. } => Ok(group),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaContext {
    pub family: Family,
    pub ultrafilter: UltrafilterDescriptor,
    pub gamma: Vec<UnaryTypePresentation>,
}

/// An element of a finite family member that realizes every presented
/// formula of some type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub index: usize,
    pub type_name: String,
    pub element: String,
}

impl GammaContext {
    /// Build a context, rejecting finite members that realize a presented
    /// type fragment.
    pub fn new(
        family: Family,
        ultrafilter: UltrafilterDescriptor,
        gamma: Vec<UnaryTypePresentation>,
    ) -> Result<Self, UltraError> {
        let ctx = Self::allowing_realizations(family, ultrafilter, gamma)?;
        if let Some(r) = ctx.realizations()?.into_iter().next() {
            return Err(UltraError::Context(format!(
                "member {} realizes the presented fragment of `{}` at {}",
                r.index, r.type_name, r.element
            )));
        }
        Ok(ctx)
    }

    /// Build a context whose finite members may realize a truncated type
    /// fragment (the hull is then a proper subset).
    pub fn allowing_realizations(
        family: Family,
        ultrafilter: UltrafilterDescriptor,
        gamma: Vec<UnaryTypePresentation>,
    ) -> Result<Self, UltraError> {
        match (&family, &ultrafilter) {
            (Family::Finite(ms), UltrafilterDescriptor::Principal { size, atom }) => {
                if ms.is_empty() || *size != ms.len() || atom >= size {
                    return Err(UltraError::Context(format!(
                        "principal ultrafilter at {atom} on {size} indices does not fit {} structures",
                        ms.len()
                    )));
                }
            }
            (Family::Finite(_), UltrafilterDescriptor::Frechet) => {
                return Err(UltraError::Context("the Frechet filter needs an omega-indexed family".into()))
            }
            (_, UltrafilterDescriptor::Principal { .. }) => {
                return Err(UltraError::Context("omega-indexed families use the Frechet filter".into()))
            }
            _ => {}
        }
        if let Family::Finite(ms) = &family {
            for (i, m) in ms.iter().enumerate() {
                if !m.is_finite() {
                    return Err(UltraError::Context(format!("member {i} of a finite family is not finite")));
                }
            }
        }
        for p in &gamma {
            let sig = match &family {
                Family::Finite(ms) => ms[0].signature(),
                Family::ConstantPower(m) => m.signature(),
                Family::TailPower { .. } => crate::formula::Signature::module(),
            };
            if p.is_tor() && !sig.has_scalars() {
                return Err(UltraError::Context("the torsion type needs scalars".into()));
            }
        }
        Ok(GammaContext {
            family,
            ultrafilter,
            gamma,
        })
    }

    /// Finite members realizing all presented formulas of some type.
    pub fn realizations(&self) -> Result<Vec<Realization>, UltraError> {
        let mut out = Vec::new();
        let members: Vec<&StructureHandle> = match &self.family {
            Family::Finite(ms) => ms.iter().collect(),
            Family::ConstantPower(m) => vec![m],
            Family::TailPower { .. } => vec![],
        };
        for (i, m) in members.into_iter().enumerate() {
            let StructureHandle::Finite(s) = m else { continue };
            for p in &self.gamma {
                if let Some(e) = realizer(s, p)? {
                    out.push(Realization {
                        index: i,
                        type_name: p.name.clone(),
                        element: s.universe[e].clone(),
                    });
                }
            }
        }
        Ok(out)
    }

    /// Validate a sequence against the family.
    pub fn check_sequence(&self, f: &DefinableSequence) -> Result<(), UltraError> {
        match &self.family {
            Family::Finite(ms) => {
                for (i, m) in ms.iter().enumerate() {
                    check_value(&f.at(i as u64, m)?, m)?;
                }
                if let Some(n) = f.exceptions.keys().find(|&&n| n as usize >= ms.len()) {
                    return Err(UltraError::Sequence(format!("exception at {n} outside the index set")));
                }
                Ok(())
            }
            Family::ConstantPower(m) => {
                for v in f.exceptions.values() {
                    check_value(v, m)?;
                }
                f.validate_tail(m)
            }
            Family::TailPower { group: m, .. } => {
                for (n, v) in &f.exceptions {
                    check_value(v, m)?;
                    let Value::Tor(g) = v else { unreachable!() };
                    if g.support.iter().any(|(_, c, _)| c != n) {
                        return Err(UltraError::Sequence(format!("value at {n} lies outside Z_p^h({n})")));
                    }
                }
                if let super::Tail::Const(Value::Tor(g)) = &f.tail {
                    if !g.is_zero() {
                        return Err(UltraError::Sequence("constant tails over a tail power must be 0".into()));
                    }
                }
                f.validate_tail(m)
            }
        }
    }

    /// Value at index `n`.
    pub fn value(&self, f: &DefinableSequence, n: u64) -> Result<Value, UltraError> {
        f.at(n, self.family.member(n)?)
    }
}

/// An element satisfying every presented formula of `p`, if any.
pub fn realizer(m: &FiniteStructure, p: &UnaryTypePresentation) -> Result<Option<usize>, UltraError> {
    let formulas = p.formulas();
    'elements: for e in 0..m.size() {
        for f in &formulas {
            let env = [(p.var.clone(), e)].into_iter().collect();
            if !m.eval(f, &env)? {
                continue 'elements;
            }
        }
        return Ok(Some(e));
    }
    Ok(None)
}

/// Omission table: `table[j][e]` is whether `e` satisfies the negation of
/// the `j`-th formula of `p`, for `j < depth`.
pub fn omission_table(m: &FiniteStructure, p: &UnaryTypePresentation, depth: usize) -> Result<Vec<Vec<bool>>, UltraError> {
    (0..depth)
        .map(|j| {
            let phi = p
                .formula(j)
                .ok_or_else(|| UltraError::Context(format!("`{}` has no formula {j}", p.name)))?;
            let neg = negate(&phi);
            Ok(m.satisfying(&neg, &p.var)?
                .into_iter()
                .fold(vec![false; m.size()], |mut row, e| {
                    row[e] = true;
                    row
                }))
        })
        .collect()
}
