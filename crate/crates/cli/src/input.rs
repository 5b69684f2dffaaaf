//! Loading structures, contexts, sequences and formulas from the command line.

use std::fs;
use std::path::Path;

use gamma_ultra::formula::{parse_formula, Formula, FormulaError, Signature, UnaryPP, UnaryTypePresentation};
use gamma_ultra::io::{parse_context, parse_sequence, parse_structure, IoError};
use gamma_ultra::structures::{EvalError, FiniteStructure, StructureHandle, TorsionGroup};
use gamma_ultra::torsion::TorsionError;
use gamma_ultra::ultraproduct::{DefinableSequence, GammaContext, UltraError};
use thiserror::Error;

/// Seed used for sampled checks when `GAMMA_ULTRA_SEED` is unset.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Document { path: String, source: IoError },
    #[error("formula `{text}`: {source}")]
    Formula { text: String, source: FormulaError },
    #[error("invalid sequence: {0}")]
    Sequence(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ultra(#[from] UltraError),
    #[error(transparent)]
    Torsion(#[from] TorsionError),
    #[error("GAMMA_ULTRA_SEED must be an unsigned integer, got `{0}`")]
    Seed(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_structure(path: &Path) -> Result<StructureHandle, CliError> {
    parse_structure(&read(path)?).map_err(|source| CliError::Document {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_context(path: &Path) -> Result<GammaContext, CliError> {
    parse_context(&read(path)?).map_err(|source| CliError::Document {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_finite(path: &Path) -> Result<FiniteStructure, CliError> {
    match load_structure(path)? {
        StructureHandle::Finite(m) => Ok(m),
        StructureHandle::Torsion(g) => Ok(g.realize_finite(1 << 12)?.0),
        StructureHandle::Naturals(_) => Err(CliError::Usage(format!("{} is not a finite structure", path.display()))),
    }
}

pub fn load_torsion(path: &Path) -> Result<TorsionGroup, CliError> {
    match load_structure(path)? {
        StructureHandle::Torsion(g) => Ok(g),
        _ => Err(CliError::Usage(format!("{} is not a torsion presentation", path.display()))),
    }
}

/// A sequence given inline as JSON, or as `@file`.
pub fn load_sequence(arg: &str, ctx: &GammaContext) -> Result<DefinableSequence, CliError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => read(Path::new(path))?,
        None => arg.to_string(),
    };
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Sequence(e.to_string()))?;
    parse_sequence(&json, &ctx.family).map_err(|e| CliError::Sequence(e.to_string()))
}

pub fn formula(text: &str, sig: &Signature) -> Result<Formula, CliError> {
    parse_formula(text, sig).map_err(|source| CliError::Formula {
        text: text.to_string(),
        source,
    })
}

pub fn unary_pp(text: &str) -> Result<UnaryPP, CliError> {
    UnaryPP::parse(text).map_err(|source| CliError::Formula {
        text: text.to_string(),
        source,
    })
}

/// Γ from `--tor <depth>` and `--type "phi_0; phi_1; ..."` (types in `x`,
/// named `p0`, `p1`, ... in order).
pub fn gamma(tor: Option<usize>, types: &[String], sig: &Signature) -> Result<Vec<UnaryTypePresentation>, CliError> {
    let mut out = Vec::new();
    if let Some(depth) = tor {
        out.push(UnaryTypePresentation::tor(depth));
    }
    for (i, t) in types.iter().enumerate() {
        let formulas = t
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| formula(s, sig))
            .collect::<Result<Vec<_>, _>>()?;
        let p = UnaryTypePresentation::listed(&format!("p{i}"), "x", formulas).map_err(|source| CliError::Formula {
            text: t.clone(),
            source,
        })?;
        out.push(p);
    }
    Ok(out)
}

/// The sampling seed from `GAMMA_ULTRA_SEED`.
pub fn seed() -> Result<u64, CliError> {
    match std::env::var("GAMMA_ULTRA_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Seed(s)),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
