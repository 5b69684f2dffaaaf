//! Γ-hulls and the Γ-closed / Γ-nice witness-scheme searches over finite
//! families.

use std::collections::BTreeSet;

use serde::Serialize;

use super::context::omission_table;
use super::UltraError;
use crate::formula::{fresh_name, print_formula, ChoiceFunction, Formula, Term, UnaryTypePresentation};
use crate::structures::{tuples, Assignment, FiniteStructure, StructureHandle};

/// Largest number of input profiles a scheme search enumerates per symbol.
pub const MAX_PROFILES: usize = 100_000;

/// Largest torsion group realized to compute a hull.
const REALIZATION_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FunctionClosure {
    pub symbol: String,
    pub closed: bool,
    /// Arguments in the hull whose image is not.
    pub counterexample: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HullReport {
    /// Elements omitting every presented type fragment, in universe order.
    pub elements: Vec<String>,
    pub indices: Vec<usize>,
    pub structure_size: usize,
    pub closure: Vec<FunctionClosure>,
}

impl HullReport {
    pub fn is_closed(&self) -> bool {
        self.closure.iter().all(|c| c.closed)
    }
}

/// Elements of `m` satisfying, for every type, the negation of one of its
/// first `depth` formulas.
pub fn hull_mask(m: &FiniteStructure, gamma: &[UnaryTypePresentation]) -> Result<Vec<bool>, UltraError> {
    let mut mask = vec![true; m.size()];
    for p in gamma {
        let table = omission_table(m, p, p.depth)?;
        for (e, slot) in mask.iter_mut().enumerate() {
            *slot &= table.iter().any(|row| row[e]);
        }
    }
    Ok(mask)
}

/// The Γ-hull of a finite structure (or a finite torsion group) and, per
/// function symbol, whether the hull is closed under it.
pub fn gamma_hull(m: &StructureHandle, gamma: &[UnaryTypePresentation]) -> Result<HullReport, UltraError> {
    let realized;
    let s = match m {
        StructureHandle::Finite(s) => s,
        StructureHandle::Torsion(g) if g.is_finite() => {
            realized = g.realize_finite(REALIZATION_LIMIT)?.0;
            &realized
        }
        _ => return Err(UltraError::Context("the hull is computed for finite structures only".into())),
    };
    finite_hull(s, gamma)
}

pub fn finite_hull(s: &FiniteStructure, gamma: &[UnaryTypePresentation]) -> Result<HullReport, UltraError> {
    let mask = hull_mask(s, gamma)?;
    let indices: Vec<usize> = (0..s.size()).filter(|&e| mask[e]).collect();
    let closure = s
        .signature
        .functions
        .iter()
        .map(|(symbol, arity)| {
            let counterexample = tuples(s.size(), *arity)
                .filter(|args| args.iter().all(|&a| mask[a]))
                .find(|args| s.apply(symbol, args).is_some_and(|v| !mask[v]))
                .map(|args| args.iter().map(|&a| s.universe[a].clone()).collect());
            FunctionClosure {
                symbol: symbol.clone(),
                closed: counterexample.is_none(),
                counterexample,
            }
        })
        .collect();
    Ok(HullReport {
        elements: indices.iter().map(|&e| s.universe[e].clone()).collect(),
        indices,
        structure_size: s.size(),
        closure,
    })
}

/// Theories whose closure scheme is known in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryTag {
    /// Torsion modules with `Γ = {tor}`.
    Torsion,
}

pub enum ClosureSubject<'a> {
    Family(&'a [FiniteStructure]),
    Theory(TheoryTag),
}

/// One value of a scheme function: witnesses for the inputs determine a
/// witness for the output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeEntry {
    pub symbol: String,
    pub inputs: Vec<ChoiceFunction>,
    pub output: ChoiceFunction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ClosureCheck {
    /// Tabulated scheme entries (searched) and closed-form rules (theories).
    WitnessScheme { entries: Vec<SchemeEntry>, rules: Vec<String> },
    /// In `member`, the arguments `tuple` have the listed witnesses, yet the
    /// value omits no formula choice within the search depth.
    CounterExample {
        symbol: String,
        member: usize,
        tuple: Vec<String>,
        inputs: Vec<ChoiceFunction>,
        value: String,
    },
    /// No scheme value was found within the search depth, but no element
    /// outside the truncated hull was reached either.
    Inconclusive { reason: String },
}

impl ClosureCheck {
    pub fn is_scheme(&self) -> bool {
        matches!(self, ClosureCheck::WitnessScheme { .. })
    }

    pub fn is_counterexample(&self) -> bool {
        matches!(self, ClosureCheck::CounterExample { .. })
    }
}

/// Choice functions with indices below the search depth, and for each
/// member and choice the elements satisfying the selected negations.
struct Omissions {
    choices: Vec<ChoiceFunction>,
    /// `omits[member][choice][element]`.
    omits: Vec<Vec<Vec<bool>>>,
    /// Union over all choices, per member.
    hull: Vec<Vec<bool>>,
}

impl Omissions {
    fn new(family: &[FiniteStructure], gamma: &[UnaryTypePresentation], search_depth: usize) -> Result<Self, UltraError> {
        let depths: Vec<usize> = gamma
            .iter()
            .map(|p| if p.is_tor() { search_depth } else { p.depth.min(search_depth) }.max(1))
            .collect();
        let mut choices = vec![ChoiceFunction(Vec::new())];
        for &d in &depths {
            choices = choices
                .into_iter()
                .flat_map(|c| {
                    (0..d).map(move |j| {
                        let mut v = c.0.clone();
                        v.push(j);
                        ChoiceFunction(v)
                    })
                })
                .collect();
        }
        let mut omits = Vec::with_capacity(family.len());
        let mut hull = Vec::with_capacity(family.len());
        for m in family {
            let tables = gamma
                .iter()
                .zip(&depths)
                .map(|(p, &d)| omission_table(m, p, d))
                .collect::<Result<Vec<_>, _>>()?;
            let per_choice: Vec<Vec<bool>> = choices
                .iter()
                .map(|c| {
                    (0..m.size())
                        .map(|e| c.0.iter().zip(&tables).all(|(&j, t)| t[j][e]))
                        .collect()
                })
                .collect();
            let h = (0..m.size()).map(|e| per_choice.iter().any(|row| row[e])).collect();
            omits.push(per_choice);
            hull.push(h);
        }
        Ok(Omissions { choices, omits, hull })
    }

    /// Input profiles: all `arity`-tuples of choice indices.
    fn profiles(&self, arity: usize) -> Result<Vec<Vec<usize>>, String> {
        let count = self.choices.len().checked_pow(arity as u32).filter(|&n| n <= MAX_PROFILES);
        match count {
            Some(_) => Ok(tuples(self.choices.len(), arity).collect()),
            None => Err(format!(
                "{} choice functions give more than {MAX_PROFILES} profiles at arity {arity}",
                self.choices.len()
            )),
        }
    }

    fn inputs(&self, profile: &[usize]) -> Vec<ChoiceFunction> {
        profile.iter().map(|&c| self.choices[c].clone()).collect()
    }
}

fn check_family(family: &[FiniteStructure]) -> Result<(), UltraError> {
    let first = family
        .first()
        .ok_or_else(|| UltraError::Context("the family is empty".into()))?;
    if family.iter().any(|m| m.signature != first.signature) {
        return Err(UltraError::Context("family members have different signatures".into()));
    }
    Ok(())
}

fn avoid_names(gamma: &[UnaryTypePresentation], extra: &Formula) -> BTreeSet<String> {
    let mut avoid = extra.all_vars();
    for p in gamma {
        for f in p.formulas() {
            avoid.extend(f.all_vars());
        }
    }
    avoid
}

/// Search for closure witness functions `g_F` for every function symbol.
pub fn check_gamma_closed(
    subject: &ClosureSubject<'_>,
    gamma: &[UnaryTypePresentation],
    search_depth: usize,
) -> Result<ClosureCheck, UltraError> {
    let family = match subject {
        ClosureSubject::Theory(TheoryTag::Torsion) => {
            return Ok(ClosureCheck::WitnessScheme {
                entries: Vec::new(),
                rules: vec![
                    "g_+(n, m) = n*m".into(),
                    "g_-(n) = n".into(),
                    "g_0() = 1".into(),
                    "g_r(n) = n for every scalar r".into(),
                ],
            })
        }
        ClosureSubject::Family(f) => *f,
    };
    check_family(family)?;
    let om = Omissions::new(family, gamma, search_depth)?;
    let mut entries = Vec::new();
    for (symbol, arity) in &family[0].signature.functions {
        let profiles = match om.profiles(*arity) {
            Ok(p) => p,
            Err(reason) => return Ok(ClosureCheck::Inconclusive { reason }),
        };
        for profile in profiles {
            // Values of F on arguments carrying these witnesses, per member,
            // with one argument tuple producing each.
            let mut images: Vec<Vec<(usize, Vec<usize>)>> = Vec::with_capacity(family.len());
            for (i, m) in family.iter().enumerate() {
                let mut seen = vec![false; m.size()];
                let mut img = Vec::new();
                let candidates = tuples(m.size(), *arity)
                    .filter(|args| args.iter().zip(&profile).all(|(&a, &c)| om.omits[i][c][a]));
                for args in candidates {
                    let v = m
                        .apply(symbol, &args)
                        .ok_or_else(|| UltraError::Context(format!("`{symbol}` is not tabulated in member {i}")))?;
                    if !seen[v] {
                        seen[v] = true;
                        img.push((v, args));
                    }
                }
                images.push(img);
            }
            let output = (0..om.choices.len())
                .find(|&d| images.iter().enumerate().all(|(i, img)| img.iter().all(|(v, _)| om.omits[i][d][*v])));
            match output {
                Some(d) => entries.push(SchemeEntry {
                    symbol: symbol.clone(),
                    inputs: om.inputs(&profile),
                    output: om.choices[d].clone(),
                }),
                None => {
                    for (i, img) in images.iter().enumerate() {
                        if let Some((v, args)) = img.iter().find(|(v, _)| !om.hull[i][*v]) {
                            let m = &family[i];
                            return Ok(ClosureCheck::CounterExample {
                                symbol: symbol.clone(),
                                member: i,
                                tuple: args.iter().map(|&a| m.universe[a].clone()).collect(),
                                inputs: om.inputs(&profile),
                                value: m.universe[*v].clone(),
                            });
                        }
                    }
                    return Ok(ClosureCheck::Inconclusive {
                        reason: format!(
                            "no single witness for `{symbol}` on inputs {} within depth {search_depth}",
                            display_choices(&om.inputs(&profile))
                        ),
                    });
                }
            }
        }
    }
    for e in &entries {
        let sentence = closure_sentence(gamma, e, &family[0].signature.function_arity(&e.symbol).unwrap_or(0));
        verify_sentence(family, &sentence, &e.symbol)?;
    }
    Ok(ClosureCheck::WitnessScheme {
        entries,
        rules: Vec::new(),
    })
}

fn display_choices(cs: &[ChoiceFunction]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

/// `forall xs. /\ omit(C_i, x_i) -> forall y. (y = F(xs) -> omit(D, y))`.
fn closure_sentence(gamma: &[UnaryTypePresentation], e: &SchemeEntry, arity: &usize) -> Formula {
    let mut avoid = avoid_names(gamma, &Formula::truth("x"));
    let xs: Vec<String> = (0..*arity)
        .map(|_| {
            let x = fresh_name("x", &avoid);
            avoid.insert(x.clone());
            x
        })
        .collect();
    let y = fresh_name("y", &avoid);
    let hyp = Formula::conj(xs.iter().zip(&e.inputs).map(|(x, c)| c.omission_formula(gamma, x)));
    let value = Term::app(&e.symbol, xs.iter().map(|x| Term::var(x)).collect());
    let concl = Formula::forall(
        &y,
        Formula::implies(Formula::eq(Term::var(&y), value), e.output.omission_formula(gamma, &y)),
    );
    let body = match hyp {
        Some(h) => Formula::implies(h, concl),
        None => concl,
    };
    xs.iter().rev().fold(body, |acc, x| Formula::forall(x, acc))
}

fn verify_sentence(family: &[FiniteStructure], sentence: &Formula, what: &str) -> Result<(), UltraError> {
    for (i, m) in family.iter().enumerate() {
        if !m.eval(sentence, &Assignment::new())? {
            return Err(UltraError::Context(format!(
                "scheme sentence for `{what}` fails in member {i}: {}",
                print_formula(sentence)
            )));
        }
    }
    Ok(())
}

/// Search for witness functions `g_psi` for existential formulas
/// `psi = exists v. phi(v, ys)`: witnesses for the parameters `ys` must
/// determine a witness for some `v` realizing `phi`.
pub fn check_gamma_nice(
    family: &[FiniteStructure],
    gamma: &[UnaryTypePresentation],
    formulas: &[Formula],
    search_depth: usize,
) -> Result<ClosureCheck, UltraError> {
    check_family(family)?;
    let om = Omissions::new(family, gamma, search_depth)?;
    let mut entries = Vec::new();
    for psi in formulas {
        let Formula::Exists(v, body) = psi else {
            return Err(UltraError::Context(format!(
                "`{}` is not of the form exists v. phi",
                print_formula(psi)
            )));
        };
        let label = print_formula(psi);
        let params: Vec<String> = psi.free_vars().into_iter().collect();
        // Per member and parameter tuple: the elements realizing phi.
        let mut realizers: Vec<Vec<(Vec<usize>, Vec<usize>)>> = Vec::with_capacity(family.len());
        for m in family {
            let mut per_tuple = Vec::new();
            for ys in tuples(m.size(), params.len()) {
                let mut env: Assignment = params.iter().cloned().zip(ys.iter().copied()).collect();
                let mut ws = Vec::new();
                for x in 0..m.size() {
                    env.insert(v.clone(), x);
                    if m.eval(body, &env)? {
                        ws.push(x);
                    }
                }
                if !ws.is_empty() {
                    per_tuple.push((ys, ws));
                }
            }
            realizers.push(per_tuple);
        }
        let profiles = match om.profiles(params.len()) {
            Ok(p) => p,
            Err(reason) => return Ok(ClosureCheck::Inconclusive { reason }),
        };
        for profile in profiles {
            let relevant = |i: usize, ys: &[usize]| ys.iter().zip(&profile).all(|(&a, &c)| om.omits[i][c][a]);
            let output = (0..om.choices.len()).find(|&d| {
                realizers.iter().enumerate().all(|(i, per)| {
                    per.iter()
                        .filter(|(ys, _)| relevant(i, ys))
                        .all(|(_, ws)| ws.iter().any(|&x| om.omits[i][d][x]))
                })
            });
            match output {
                Some(d) => entries.push(SchemeEntry {
                    symbol: label.clone(),
                    inputs: om.inputs(&profile),
                    output: om.choices[d].clone(),
                }),
                None => {
                    for (i, per) in realizers.iter().enumerate() {
                        let bad = per
                            .iter()
                            .filter(|(ys, _)| relevant(i, ys))
                            .find(|(_, ws)| ws.iter().all(|&x| !om.hull[i][x]));
                        if let Some((ys, ws)) = bad {
                            let m = &family[i];
                            return Ok(ClosureCheck::CounterExample {
                                symbol: label,
                                member: i,
                                tuple: ys.iter().map(|&a| m.universe[a].clone()).collect(),
                                inputs: om.inputs(&profile),
                                value: m.universe[ws[0]].clone(),
                            });
                        }
                    }
                    return Ok(ClosureCheck::Inconclusive {
                        reason: format!(
                            "no single witness for `{label}` on inputs {} within depth {search_depth}",
                            display_choices(&om.inputs(&profile))
                        ),
                    });
                }
            }
        }
        for e in entries.iter().filter(|e| e.symbol == label) {
            verify_sentence(family, &nice_sentence(gamma, e, &params, v, body), &label)?;
        }
    }
    Ok(ClosureCheck::WitnessScheme {
        entries,
        rules: Vec::new(),
    })
}

/// `forall ys. (/\ omit(C_i, y_i) & exists v. phi) -> exists v. (phi & omit(D, v))`.
fn nice_sentence(gamma: &[UnaryTypePresentation], e: &SchemeEntry, params: &[String], v: &str, body: &Formula) -> Formula {
    let psi = Formula::exists(v, body.clone());
    let hyp = Formula::conj(
        params
            .iter()
            .zip(&e.inputs)
            .map(|(y, c)| c.omission_formula(gamma, y))
            .chain(std::iter::once(psi)),
    )
    .expect("non-empty");
    let concl = Formula::exists(v, Formula::and(body.clone(), e.output.omission_formula(gamma, v)));
    params
        .iter()
        .rev()
        .fold(Formula::implies(hyp, concl), |acc, y| Formula::forall(y, acc))
}
