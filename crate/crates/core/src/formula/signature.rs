use serde::{Deserialize, Serialize};

use super::FormulaError;

/// Ring tag enabling scalar terms `k*t` and divisibility atoms `p^n | t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarRing {
    #[serde(rename = "Z")]
    Integers,
}

/// A first-order signature. Arity-0 functions are constants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub name: String,
    pub functions: Vec<(String, usize)>,
    #[serde(default)]
    pub relations: Vec<(String, usize)>,
    #[serde(default)]
    pub scalar: Option<ScalarRing>,
    /// Every integer literal is a constant symbol interpreted by the structure.
    #[serde(default)]
    pub numerals: bool,
}

impl Signature {
    pub fn new(
        name: impl Into<String>,
        functions: Vec<(String, usize)>,
        relations: Vec<(String, usize)>,
        scalar: Option<ScalarRing>,
    ) -> Result<Self, FormulaError> {
        let sig = Signature {
            name: name.into(),
            functions,
            relations,
            scalar,
            numerals: false,
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<(), FormulaError> {
        let mut seen = std::collections::HashSet::new();
        for (s, _) in self.functions.iter().chain(self.relations.iter()) {
            if !seen.insert(s.as_str()) {
                return Err(FormulaError::Signature(format!("duplicate symbol `{s}`")));
            }
        }
        if let Some((r, _)) = self.relations.iter().find(|(_, a)| *a == 0) {
            return Err(FormulaError::Signature(format!("relation `{r}` has arity 0")));
        }
        Ok(())
    }

    /// The module language over Z: `+`, unary `-`, `0`, scalar multiples.
    pub fn module() -> Self {
        Signature {
            name: "Z-module".into(),
            functions: vec![("+".into(), 2), ("-".into(), 1), ("0".into(), 0)],
            relations: vec![],
            scalar: Some(ScalarRing::Integers),
            numerals: false,
        }
    }

    /// Module language with an extra constant `1`, used for the cyclic groups `Z_n`.
    pub fn cyclic_module() -> Self {
        let mut sig = Self::module();
        sig.name = "Z-module+1".into();
        sig.functions.push(("1".into(), 0));
        sig
    }

    /// Arithmetic on the naturals: `+`, `mul`, numerals, `lt`, `le`, scalars and divisibility.
    pub fn naturals() -> Self {
        Signature {
            name: "naturals".into(),
            functions: vec![("+".into(), 2), ("mul".into(), 2)],
            relations: vec![("lt".into(), 2), ("le".into(), 2)],
            scalar: Some(ScalarRing::Integers),
            numerals: true,
        }
    }

    pub fn function_arity(&self, sym: &str) -> Option<usize> {
        if self.numerals && is_numeral(sym) {
            return Some(0);
        }
        self.functions.iter().find(|(s, _)| s == sym).map(|(_, a)| *a)
    }

    pub fn relation_arity(&self, sym: &str) -> Option<usize> {
        self.relations.iter().find(|(s, _)| s == sym).map(|(_, a)| *a)
    }

    pub fn is_constant(&self, sym: &str) -> bool {
        self.function_arity(sym) == Some(0)
    }

    pub fn has_scalars(&self) -> bool {
        self.scalar.is_some()
    }
}

pub(crate) fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}
