//! Brute-force verification of Łoś transfer between the ultraproduct and
//! the Γ-ultraproduct of a finite family under a principal ultrafilter.
//!
//! With `U` principal at `i0`, a sequence is U-large-true exactly when it is
//! true at `i0`, and the Γ-ultraproduct is canonically the Γ-hull of
//! `M_{i0}`. The report first checks that identification by explicit
//! construction (the principal-collapse check), then compares, for each
//! formula and sampled tuple of members, the left side
//! `{i : M_i |= phi(f(i))} in U` with the right side, evaluated in the hull.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use super::context::{Family, GammaContext};
use super::filter::{Largeness, SatSet, UltrafilterDescriptor};
use super::hull::{finite_hull, HullReport};
use super::membership::{membership_check, pointwise};
use super::sequence::DefinableSequence;
use super::UltraError;
use crate::formula::{classify_quantifier, print_formula, Formula, QuantClass};
use crate::structures::{tuples, Assignment, Evaluator, FiniteStructure, StructureHandle, Value};

/// How many tuples of member sequences to try per formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sampling {
    /// Enumerate exhaustively when the candidate count is at most this,
    /// otherwise draw this many at random.
    pub max_tuples: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            max_tuples: 512,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassTally {
    /// Formulas whose every sample agreed on both sides.
    pub both: usize,
    /// Samples with the left side true and the right side false.
    pub lr_failures: usize,
    /// Samples with the left side false and the right side true.
    pub rl_failures: usize,
    pub samples: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormulaReport {
    pub formula: String,
    pub class: QuantClass,
    pub samples: usize,
    pub lr_failures: usize,
    pub rl_failures: usize,
    /// Why the formula was not checked (function symbols over a hull that is
    /// not a substructure).
    pub skipped: Option<String>,
    /// Values at `i0` of the first failing tuple.
    pub first_failure: Option<Vec<String>>,
}

/// Outcome of the principal-collapse check: `[f] -> f(i0)` is a bijection
/// from the Γ-ultraproduct onto the hull of `M_{i0}` that commutes with the
/// function tables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CollapseReport {
    pub sequences_checked: usize,
    pub members: usize,
    pub hull_size: usize,
    pub bijective: bool,
    pub commutes: bool,
    pub violations: Vec<String>,
}

impl CollapseReport {
    pub fn holds(&self) -> bool {
        self.bijective && self.commutes
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub atom: usize,
    pub hull: HullReport,
    pub collapse: CollapseReport,
    pub formulas: Vec<FormulaReport>,
    pub classes: BTreeMap<QuantClass, ClassTally>,
}

impl TransferReport {
    pub fn tally(&self, class: QuantClass) -> ClassTally {
        self.classes.get(&class).cloned().unwrap_or_default()
    }
}

fn finite_members(ctx: &GammaContext) -> Result<(Vec<&FiniteStructure>, usize), UltraError> {
    let (Family::Finite(ms), UltrafilterDescriptor::Principal { atom, .. }) = (&ctx.family, ctx.ultrafilter) else {
        return Err(UltraError::Context(
            "Łoś verification needs a finite family with a principal ultrafilter".into(),
        ));
    };
    let members = ms
        .iter()
        .map(|m| match m {
            StructureHandle::Finite(s) => Ok(s),
            _ => Err(UltraError::Context("Łoś verification needs finite structures".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((members, atom))
}

/// Sequences `f` with `f(i)` in `M_i`, as element indices.
struct SequenceSpace<'a> {
    sizes: Vec<usize>,
    members: &'a [&'a FiniteStructure],
}

impl SequenceSpace<'_> {
    fn count(&self) -> Option<usize> {
        self.sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s))
    }

    fn all(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &s in &self.sizes {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..s).map(move |e| {
                        let mut w = v.clone();
                        w.push(e);
                        w
                    })
                })
                .collect();
        }
        out
    }

    fn random(&self, rng: &mut StdRng) -> Vec<usize> {
        self.sizes.iter().map(|&s| rng.gen_range(0..s)).collect()
    }

    fn sequence(&self, f: &[usize]) -> DefinableSequence {
        DefinableSequence::listed(f.iter().map(|&e| Value::Elem(e)).collect())
    }

    fn label(&self, atom: usize, f: &[usize]) -> String {
        self.members[atom].universe[f[atom]].clone()
    }
}

/// Check the principal collapse on the sequences of a finite family:
/// exhaustively when there are at most `limit` sequences, otherwise on
/// `limit` random ones.
pub fn principal_collapse(ctx: &GammaContext, limit: usize, seed: u64) -> Result<CollapseReport, UltraError> {
    let (members, atom) = finite_members(ctx)?;
    let hull = finite_hull(members[atom], &ctx.gamma)?;
    let in_hull = |e: usize| hull.indices.binary_search(&e).is_ok();
    let space = SequenceSpace {
        sizes: members.iter().map(|m| m.size()).collect(),
        members: &members,
    };
    let mut rng = StdRng::seed_from_u64(seed);
    let mut candidates = match space.count() {
        Some(n) if n <= limit => space.all(),
        _ => (0..limit).map(|_| space.random(&mut rng)).collect(),
    };
    // Every hull element must be hit: add a witness sequence for each.
    for &h in &hull.indices {
        let mut f = vec![0; members.len()];
        f[atom] = h;
        candidates.push(f);
    }
    let mut report = CollapseReport {
        hull_size: hull.indices.len(),
        bijective: true,
        commutes: true,
        ..Default::default()
    };
    let mut images = vec![false; members[atom].size()];
    let mut member_seqs = Vec::new();
    for f in &candidates {
        report.sequences_checked += 1;
        let is_member = membership_check(ctx, &space.sequence(f))?.is_member();
        if is_member != in_hull(f[atom]) {
            report.bijective = false;
            report.violations.push(format!(
                "sequence with value {} at the atom: membership {is_member}",
                space.label(atom, f)
            ));
        }
        if is_member {
            report.members += 1;
            images[f[atom]] = true;
            member_seqs.push(f.clone());
        }
    }
    if hull.indices.iter().any(|&h| !images[h]) || images.iter().filter(|&&b| b).count() != hull.indices.len() {
        report.bijective = false;
        report.violations.push("member classes do not cover the hull exactly".into());
    }
    // Commuting with function tables, on closed symbols.
    let m0 = members[atom];
    for fc in hull.closure.iter().filter(|c| c.closed) {
        let arity = m0.signature.function_arity(&fc.symbol).unwrap_or(0);
        let picks: Vec<Vec<usize>> = match member_seqs.len().checked_pow(arity as u32) {
            Some(n) if n <= limit => tuples(member_seqs.len(), arity).collect(),
            _ => (0..limit)
                .map(|_| (0..arity).map(|_| rng.gen_range(0..member_seqs.len())).collect())
                .collect(),
        };
        for pick in picks {
            let args: Vec<DefinableSequence> = pick.iter().map(|&k| space.sequence(&member_seqs[k])).collect();
            let refs: Vec<&DefinableSequence> = args.iter().collect();
            let image = pointwise(ctx, &fc.symbol, &refs)?.expect("finite families have listed images");
            let at_atom: Vec<usize> = pick.iter().map(|&k| member_seqs[k][atom]).collect();
            let expected = m0.apply(&fc.symbol, &at_atom).expect("tabulated");
            let value = image.at(atom as u64, ctx.family.member(atom as u64)?)?;
            let member = membership_check(ctx, &image)?.is_member();
            if value != Value::Elem(expected) || !member {
                report.commutes = false;
                report.violations.push(format!("`{}` does not commute on {pick:?}", fc.symbol));
            }
        }
    }
    Ok(report)
}

/// Verify the Łoś biconditional for each formula on sampled tuples of
/// Γ-ultraproduct members.
pub fn verify_los_finite(
    ctx: &GammaContext,
    formulas: &[Formula],
    sampling: Sampling,
) -> Result<TransferReport, UltraError> {
    let (members, atom) = finite_members(ctx)?;
    let hull = finite_hull(members[atom], &ctx.gamma)?;
    let collapse = principal_collapse(ctx, sampling.max_tuples, sampling.seed)?;
    let space = SequenceSpace {
        sizes: members.iter().map(|m| m.size()).collect(),
        members: &members,
    };
    // Members of the Γ-ultraproduct, as sequences: exhaustive or sampled.
    let mut rng = StdRng::seed_from_u64(sampling.seed);
    let candidates: Vec<Vec<usize>> = match space.count() {
        Some(n) if n <= sampling.max_tuples => space.all(),
        _ => (0..sampling.max_tuples).map(|_| space.random(&mut rng)).collect(),
    };
    let mut pool = Vec::new();
    for f in candidates {
        if membership_check(ctx, &space.sequence(&f))?.is_member() {
            pool.push(f);
        }
    }
    let hull_closed = hull.is_closed();
    let reports = formulas
        .par_iter()
        .enumerate()
        .map(|(k, phi)| {
            let mut rng = StdRng::seed_from_u64(sampling.seed.wrapping_add(k as u64 + 1));
            check_formula(ctx, &members, atom, &hull, hull_closed, &pool, phi, sampling, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let classes = reports.iter().fold(BTreeMap::new(), |mut acc: BTreeMap<QuantClass, ClassTally>, r| {
        let t = acc.entry(r.class).or_default();
        if r.skipped.is_some() {
            t.skipped += 1;
        } else {
            t.samples += r.samples;
            t.lr_failures += r.lr_failures;
            t.rl_failures += r.rl_failures;
            if r.lr_failures == 0 && r.rl_failures == 0 {
                t.both += 1;
            }
        }
        acc
    });
    Ok(TransferReport {
        atom,
        hull,
        collapse,
        formulas: reports,
        classes,
    })
}

#[allow(clippy::too_many_arguments)]
fn check_formula(
    ctx: &GammaContext,
    members: &[&FiniteStructure],
    atom: usize,
    hull: &HullReport,
    hull_closed: bool,
    pool: &[Vec<usize>],
    phi: &Formula,
    sampling: Sampling,
    rng: &mut StdRng,
) -> Result<FormulaReport, UltraError> {
    let mut report = FormulaReport {
        formula: print_formula(phi),
        class: classify_quantifier(phi),
        samples: 0,
        lr_failures: 0,
        rl_failures: 0,
        skipped: None,
        first_failure: None,
    };
    if !hull_closed && phi.mentions_function() {
        report.skipped = Some("the hull is not closed; only the relational reduct is checked".into());
        return Ok(report);
    }
    if pool.is_empty() {
        report.skipped = Some("no sampled member of the Γ-ultraproduct".into());
        return Ok(report);
    }
    let vars: Vec<String> = phi.free_vars().into_iter().collect();
    let picks: Vec<Vec<usize>> = match pool.len().checked_pow(vars.len() as u32) {
        Some(n) if n <= sampling.max_tuples => tuples(pool.len(), vars.len()).collect(),
        _ => (0..sampling.max_tuples)
            .map(|_| (0..vars.len()).map(|_| rng.gen_range(0..pool.len())).collect())
            .collect(),
    };
    let right_eval = Evaluator::restricted(members[atom], hull.indices.clone());
    for pick in picks {
        let env_at = |i: usize| -> Assignment { vars.iter().cloned().zip(pick.iter().map(|&k| pool[k][i])).collect() };
        let mut truth = Vec::new();
        for (i, m) in members.iter().enumerate() {
            if m.eval(phi, &env_at(i))? {
                truth.push(i as u64);
            }
        }
        let left = ctx.ultrafilter.decide(&SatSet::finite(truth)) == Largeness::Large;
        let right = right_eval.eval(phi, &env_at(atom))?;
        report.samples += 1;
        match (left, right) {
            (true, false) => report.lr_failures += 1,
            (false, true) => report.rl_failures += 1,
            _ => continue,
        }
        report.first_failure.get_or_insert_with(|| {
            pick.iter()
                .map(|&k| members[atom].universe[pool[k][atom]].clone())
                .collect()
        });
    }
    Ok(report)
}
