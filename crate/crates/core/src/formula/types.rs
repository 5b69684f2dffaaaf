//! Finitely presented unary types and choice functions over them.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::ast::{Formula, Term};
use super::FormulaError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeSource {
    /// An explicit finite prefix `phi_0, phi_1, ...` of the type.
    Listed(Vec<Formula>),
    /// The torsion-freeness type `{ r*x != 0 : r = 1, 2, 3, ... }`.
    Tor,
}

/// A unary type truncated to its first `depth` formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryTypePresentation {
    pub name: String,
    pub var: String,
    pub source: TypeSource,
    pub depth: usize,
}

impl UnaryTypePresentation {
    pub fn listed(name: &str, var: &str, formulas: Vec<Formula>) -> Result<Self, FormulaError> {
        if formulas.is_empty() {
            return Err(FormulaError::Type(format!("type `{name}` lists no formulas")));
        }
        for f in &formulas {
            let free = f.free_vars();
            if free.len() != 1 || !free.contains(var) {
                return Err(FormulaError::Type(format!(
                    "formula `{f}` of type `{name}` must have exactly the free variable `{var}`"
                )));
            }
        }
        Ok(UnaryTypePresentation {
            name: name.to_string(),
            var: var.to_string(),
            depth: formulas.len(),
            source: TypeSource::Listed(formulas),
        })
    }

    pub fn tor(depth: usize) -> Self {
        UnaryTypePresentation {
            name: "tor".into(),
            var: "x".into(),
            source: TypeSource::Tor,
            depth: depth.max(1),
        }
    }

    pub fn is_tor(&self) -> bool {
        matches!(self.source, TypeSource::Tor)
    }

    /// The `j`-th formula. Listed types only answer within their list; the
    /// torsion generator answers at every index (`(j+1)*x != 0`).
    pub fn formula(&self, j: usize) -> Option<Formula> {
        match &self.source {
            TypeSource::Listed(fs) => fs.get(j).cloned(),
            TypeSource::Tor => Some(Formula::not(Formula::eq(
                Term::scalar(BigInt::from(j as u64 + 1), Term::var(&self.var)),
                Term::zero(),
            ))),
        }
    }

    /// The `j`-th formula with its variable renamed to `x`.
    pub fn formula_in(&self, j: usize, x: &str) -> Option<Formula> {
        self.formula(j).map(|f| f.rename_free(&self.var, x))
    }

    /// Formulas within the truncation depth.
    pub fn formulas(&self) -> Vec<Formula> {
        (0..self.depth).filter_map(|j| self.formula(j)).collect()
    }

    pub fn with_depth(&self, depth: usize) -> Result<Self, FormulaError> {
        if let TypeSource::Listed(fs) = &self.source {
            if depth > fs.len() {
                return Err(FormulaError::TruncationTooShallow {
                    name: self.name.clone(),
                    have: fs.len(),
                    need: depth,
                });
            }
        }
        Ok(UnaryTypePresentation {
            depth,
            ..self.clone()
        })
    }
}

/// For each presented type (by position), the index of the chosen formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChoiceFunction(pub Vec<usize>);

impl ChoiceFunction {
    pub fn validate(&self, gamma: &[UnaryTypePresentation]) -> Result<(), FormulaError> {
        if self.0.len() != gamma.len() {
            return Err(FormulaError::Type(format!(
                "choice function covers {} types, gamma has {}",
                self.0.len(),
                gamma.len()
            )));
        }
        for (j, p) in self.0.iter().zip(gamma) {
            if !p.is_tor() && *j >= p.depth {
                return Err(FormulaError::Type(format!(
                    "choice index {j} beyond depth {} of `{}`",
                    p.depth, p.name
                )));
            }
        }
        Ok(())
    }

    /// All choice functions within the truncation depths, in lexicographic
    /// order (types in presentation order, indices ascending).
    pub fn enumerate(gamma: &[UnaryTypePresentation]) -> Vec<ChoiceFunction> {
        let mut out = vec![ChoiceFunction(Vec::new())];
        for p in gamma {
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..p.depth).map(move |j| {
                        let mut v = c.0.clone();
                        v.push(j);
                        ChoiceFunction(v)
                    })
                })
                .collect();
        }
        out
    }

    /// `/\_p ~C(p)(x)`: the element at `x` omits every type at the chosen place.
    pub fn omission_formula(&self, gamma: &[UnaryTypePresentation], x: &str) -> Formula {
        let parts = self
            .0
            .iter()
            .zip(gamma)
            .map(|(j, p)| negate(&p.formula_in(*j, x).expect("validated choice")));
        Formula::conj(parts).unwrap_or_else(|| Formula::truth(x))
    }
}

impl fmt::Display for ChoiceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "]")
    }
}

/// Negation with double negations removed.
pub fn negate(f: &Formula) -> Formula {
    match f {
        Formula::Not(x) => (**x).clone(),
        _ => Formula::not(f.clone()),
    }
}

/// `psi_ell(x) := /\_{p in gamma} \/_{n < ell} ~phi^p_n(x)`: the elements
/// omitting every type within its first `ell` formulas.
pub fn build_psi_ell(gamma: &[UnaryTypePresentation], ell: usize) -> Result<Formula, FormulaError> {
    if ell == 0 {
        return Err(FormulaError::Type("ell must be positive".into()));
    }
    let mut conjuncts = Vec::new();
    for p in gamma {
        if !p.is_tor() && p.depth < ell {
            return Err(FormulaError::TruncationTooShallow {
                name: p.name.clone(),
                have: p.depth,
                need: ell,
            });
        }
        let disjuncts = (0..ell).map(|n| negate(&p.formula_in(n, "x").expect("within depth")));
        conjuncts.push(Formula::disj(disjuncts).unwrap());
    }
    Ok(Formula::conj(conjuncts).unwrap_or_else(|| Formula::truth("x")))
}
