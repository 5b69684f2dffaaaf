//! Concrete structures: finite structures with full first-order evaluation,
//! the standard naturals, and presented torsion abelian groups.

mod finite;
mod inv;
mod naturals;
mod torsion;

pub use finite::{tuples, Assignment, Evaluator, FiniteStructure, FnTable, RelTable, MAX_TABLE_ENTRIES};
pub use inv::{
    component_index, compute_inv_finite, compute_inv_presentation, eval_invariants_sentence, tail_stabilization,
    InvariantValue,
};
pub use naturals::{stabilization, term_poly, NatModel, Poly, Stabilization};
pub use torsion::{order_exponent, Affine, Component, ComponentValue, Multiplicity, Summand, TorsionElement, TorsionGroup};

use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::formula::{InvCondition, Signature, UnaryPP};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("symbol `{0}` has no interpretation")]
    UnknownSymbol(String),
    #[error("scalar multiplication needs `+`, `-` and `0`")]
    NoModuleStructure,
    #[error("expected {expected} element(s), got {found}")]
    Arity { expected: usize, found: usize },
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("invalid element: {0}")]
    Element(String),
    #[error("not decidable here: {0}")]
    Unsupported(String),
}

/// An element of one of the supported structures.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    /// Index into a finite universe.
    Elem(usize),
    Nat(BigUint),
    Tor(TorsionElement),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Elem(i) => write!(f, "#{i}"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Tor(g) => write!(f, "{g}"),
        }
    }
}

/// Any structure the engine can evaluate in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureHandle {
    Finite(FiniteStructure),
    Torsion(TorsionGroup),
    Naturals(NatModel),
}

impl StructureHandle {
    pub fn signature(&self) -> Signature {
        match self {
            StructureHandle::Finite(m) => m.signature.clone(),
            StructureHandle::Torsion(_) => Signature::module(),
            StructureHandle::Naturals(n) => n.signature(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, StructureHandle::Finite(_))
    }

    /// `Inv(M, phi, psi)` capped at `cap`, for groups.
    pub fn compute_inv(&self, phi: &UnaryPP, psi: &UnaryPP, cap: &BigUint) -> Result<InvariantValue, EvalError> {
        match self {
            StructureHandle::Finite(m) => compute_inv_finite(m, phi, psi, cap),
            StructureHandle::Torsion(g) => compute_inv_presentation(g, phi, psi, cap),
            StructureHandle::Naturals(_) => Err(EvalError::Unsupported("N is not a group".into())),
        }
    }

    pub fn eval_invariants_sentence(&self, cond: &InvCondition) -> Result<bool, EvalError> {
        eval_invariants_sentence(|phi, psi, cap| self.compute_inv(phi, psi, cap), cond)
    }
}
