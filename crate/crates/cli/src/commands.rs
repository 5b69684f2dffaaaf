//! One function per subcommand. Each returns a JSON record and the lines of
//! its human-readable rendering.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use gamma_ultra::formula::{Formula, InvCondition, Signature, UnaryTypePresentation};
use gamma_ultra::io::parse_value;
use gamma_ultra::structures::{
    compute_inv_presentation, EvalError, FiniteStructure, StructureHandle, TorsionGroup, Value,
};
use gamma_ultra::torsion::{
    dividing_line, ee_invariants_check, tor_divisibility, tor_los_pp_verify, tor_membership, DividingLine, EeVerdict,
};
use gamma_ultra::ultraproduct::{
    check_gamma_closed, check_gamma_nice, gamma_hull, gup_sum_check, membership_check, verify_los_finite,
    ClosureCheck, ClosureSubject, Family, GammaContext, MembershipVerdict, Sampling, TheoryTag, TransferReport,
};
use num_bigint::BigUint;
use serde_json::{json, Value as Json};

use crate::input::{self, CliError};

/// The result of one subcommand.
pub struct Report {
    pub record: Json,
    pub lines: Vec<String>,
}

impl Report {
    fn new(record: Json, lines: Vec<String>) -> Self {
        Report { record, lines }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("reports serialize")
}

/// `true`, `false`, or `undecided` with the reason.
fn truth(result: Result<bool, EvalError>) -> Result<(Json, String), CliError> {
    match result {
        Ok(b) => Ok((json!(b), b.to_string())),
        Err(EvalError::Unsupported(reason)) => Ok((json!({ "undecided": reason }), format!("undecided ({reason})"))),
        Err(e) => Err(e.into()),
    }
}

/// `var=literal` assignments, literals read as JSON when possible and as
/// element names otherwise.
fn assignment(assign: &[String], m: &StructureHandle) -> Result<Vec<(String, Value)>, CliError> {
    assign
        .iter()
        .map(|a| {
            let (var, lit) = a
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("assignment `{a}` is not of the form var=value")))?;
            let json = serde_json::from_str(lit.trim()).unwrap_or_else(|_| Json::String(lit.trim().to_string()));
            let v = parse_value(&json, m).map_err(|e| CliError::Usage(format!("assignment `{a}`: {e}")))?;
            Ok((var.trim().to_string(), v))
        })
        .collect()
}

pub struct EvalArgs {
    pub structure: PathBuf,
    pub formula: String,
    pub assign: Vec<String>,
    pub cap: u64,
    pub trace: bool,
}

pub fn eval(a: &EvalArgs) -> Result<Report, CliError> {
    let m = input::load_structure(&a.structure)?;
    let f = input::formula(&a.formula, &m.signature())?;
    let env = assignment(&a.assign, &m)?;
    let mut trace = Vec::new();
    let result = match &m {
        StructureHandle::Finite(s) => {
            let env: HashMap<String, usize> = env
                .into_iter()
                .map(|(x, v)| match v {
                    Value::Elem(e) => (x, e),
                    _ => unreachable!("finite literals are elements"),
                })
                .collect();
            if a.trace {
                trace = finite_trace(s, &f, &env)?;
            }
            s.eval(&f, &env)
        }
        StructureHandle::Torsion(g) => match InvCondition::from_formula(&f) {
            Some(cond) => {
                if a.trace {
                    let cap = BigUint::from(cond.k.max(a.cap));
                    trace.push(format!("invariants sentence {cond}"));
                    trace.extend(summand_trace(g, &cond.phi, &cond.psi, &cap)?);
                }
                m.eval_invariants_sentence(&cond)
            }
            None => {
                let env: BTreeMap<_, _> = env
                    .into_iter()
                    .map(|(x, v)| match v {
                        Value::Tor(t) => (x, t),
                        _ => unreachable!("torsion literals are torsion elements"),
                    })
                    .collect();
                if a.trace {
                    trace.push("boolean combination of p.p. formulas, decided componentwise".into());
                }
                g.eval_formula(&f, &env)
            }
        },
        StructureHandle::Naturals(n) => {
            let env: HashMap<String, BigUint> = env
                .into_iter()
                .map(|(x, v)| match v {
                    Value::Nat(k) => (x, k),
                    _ => unreachable!("naturals literals are numbers"),
                })
                .collect();
            n.eval_qf(&f, &env)
        }
    };
    let (value, word) = truth(result)?;
    let mut record = json!({ "command": "eval", "formula": f.to_string(), "value": value });
    if a.trace {
        record["trace"] = json!(trace);
    }
    let mut lines = vec![format!("{f}: {word}")];
    lines.extend(trace.into_iter().map(|t| format!("  {t}")));
    Ok(Report::new(record, lines))
}

/// Truth of the body of an outermost quantifier for each element.
fn finite_trace(s: &FiniteStructure, f: &Formula, env: &HashMap<String, usize>) -> Result<Vec<String>, CliError> {
    let (Formula::Exists(v, body) | Formula::Forall(v, body)) = f else {
        return Ok(vec!["no outermost quantifier".into()]);
    };
    let kind = if matches!(f, Formula::Exists(..)) { "exists" } else { "forall" };
    let mut out = vec![format!("{kind} {v} over {} elements", s.size())];
    for (e, name) in s.universe.iter().enumerate() {
        let mut env = env.clone();
        env.insert(v.clone(), e);
        out.push(format!("{v} = {name}: {}", s.eval(body, &env)?));
    }
    Ok(out)
}

/// `Inv` on each summand separately; the total is their product.
fn summand_trace(
    g: &TorsionGroup,
    phi: &gamma_ultra::formula::UnaryPP,
    psi: &gamma_ultra::formula::UnaryPP,
    cap: &BigUint,
) -> Result<Vec<String>, CliError> {
    g.summands
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let single = TorsionGroup::new(vec![s.clone()])?;
            let v = compute_inv_presentation(&single, phi, psi, cap)?;
            Ok(format!("summand {i} {}: {v}", serde_json::to_string(s).expect("summands serialize")))
        })
        .collect()
}

pub struct InvArgs {
    pub structure: PathBuf,
    pub phi: String,
    pub psi: String,
    pub cap: u64,
    pub trace: bool,
}

pub fn inv(a: &InvArgs) -> Result<Report, CliError> {
    let m = input::load_structure(&a.structure)?;
    let (phi, psi) = (input::unary_pp(&a.phi)?, input::unary_pp(&a.psi)?);
    let cap = BigUint::from(a.cap);
    let value = m.compute_inv(&phi, &psi, &cap)?;
    let trace = match (&m, a.trace) {
        (StructureHandle::Torsion(g), true) => summand_trace(g, &phi, &psi, &cap)?,
        (StructureHandle::Finite(s), true) => {
            let both = phi.and(&psi);
            vec![
                format!("|phi(M)| = {}", s.satisfying(&phi.to_formula("x"), "x")?.len()),
                format!("|phi(M) & psi(M)| = {}", s.satisfying(&both.to_formula("x"), "x")?.len()),
            ]
        }
        _ => Vec::new(),
    };
    let mut record = json!({
        "command": "inv",
        "phi": phi.to_string(),
        "psi": psi.to_string(),
        "cap": a.cap,
        "value": to_json(&value),
    });
    if a.trace {
        record["trace"] = json!(trace);
    }
    let mut lines = vec![format!("Inv({phi}, {psi}) = {value} (cap {})", a.cap)];
    lines.extend(trace.into_iter().map(|t| format!("  {t}")));
    Ok(Report::new(record, lines))
}

pub struct MemberArgs {
    pub context: PathBuf,
    pub sequence: String,
    pub plus: Option<String>,
    pub divides: Option<String>,
}

fn is_tor_context(ctx: &GammaContext) -> bool {
    ctx.gamma.len() == 1
        && ctx.gamma[0].is_tor()
        && matches!(
            ctx.family,
            Family::ConstantPower(StructureHandle::Torsion(_)) | Family::TailPower { .. }
        )
}

/// `p^k` as `(p, k)`.
fn prime_power(text: &str) -> Result<(u64, u32), CliError> {
    let bad = || CliError::Usage(format!("`{text}` is not of the form p^k"));
    let (p, k) = text.split_once('^').ok_or_else(bad)?;
    Ok((p.trim().parse().map_err(|_| bad())?, k.trim().parse().map_err(|_| bad())?))
}

fn membership_line(v: &MembershipVerdict) -> String {
    match v {
        MembershipVerdict::Member { witness, large_set } => format!("member: witness {witness} on {large_set}"),
        MembershipVerdict::NotMember {
            type_name,
            depth,
            certificates,
            ..
        } => {
            let sets: Vec<String> = certificates.iter().map(|c| c.set.to_string()).collect();
            format!("not a member: every formula of `{type_name}` up to depth {depth} holds on a large set; negations hold on {}", sets.join("; "))
        }
        MembershipVerdict::Undecided { reason } => format!("undecided ({reason})"),
    }
}

pub fn member(a: &MemberArgs) -> Result<Report, CliError> {
    let ctx = input::load_context(&a.context)?;
    let f = input::load_sequence(&a.sequence, &ctx)?;
    let (subject, verdict) = match &a.plus {
        Some(g) => {
            let g = input::load_sequence(g, &ctx)?;
            (format!("{f} + {g}"), gup_sum_check(&ctx, "+", &f, &g)?)
        }
        None => (f.to_string(), membership_check(&ctx, &f)?),
    };
    let mut record = json!({ "command": "member", "sequence": subject, "membership": to_json(&verdict) });
    let mut lines = vec![format!("{subject}: {}", membership_line(&verdict))];
    if a.plus.is_none() && is_tor_context(&ctx) {
        let tor = tor_membership(&ctx, &f)?;
        record["tor"] = to_json(&tor);
        lines.push(match tor.member() {
            Some(m) => format!("uniform order {} on {}", m.order, m.large_set),
            None => "no uniform order among the candidates".into(),
        });
        if let Some(d) = &a.divides {
            let (p, k) = prime_power(d)?;
            let div = tor_divisibility(&ctx, &f, p, k)?;
            lines.push(match &div {
                gamma_ultra::torsion::DivisibilityVerdict::Holds {
                    witness,
                    witness_order,
                    ..
                } => format!("{p}^{k} divides it: witness {witness} of order {witness_order}"),
                gamma_ultra::torsion::DivisibilityVerdict::Fails { set } => {
                    format!("{p}^{k} does not divide it (divisible only on {set})")
                }
                gamma_ultra::torsion::DivisibilityVerdict::Undecided { reason } => format!("undecided ({reason})"),
            });
            record["divides"] = json!({ "p": p, "k": k, "verdict": to_json(&div) });
        }
    } else if a.divides.is_some() {
        return Err(CliError::Usage(
            "--divides needs a torsion family with the torsion type as its only type".into(),
        ));
    }
    Ok(Report::new(record, lines))
}

pub struct GammaArgs {
    pub tor: Option<usize>,
    pub types: Vec<String>,
}

impl GammaArgs {
    fn build(&self, sig: &Signature) -> Result<Vec<UnaryTypePresentation>, CliError> {
        input::gamma(self.tor, &self.types, sig)
    }
}

pub fn hull(structure: &Path, gamma: &GammaArgs) -> Result<Report, CliError> {
    let m = input::load_structure(structure)?;
    let report = gamma_hull(&m, &gamma.build(&m.signature())?)?;
    let mut lines = vec![format!(
        "hull: {} of {} elements: {{{}}}",
        report.elements.len(),
        report.structure_size,
        report.elements.join(", ")
    )];
    for c in &report.closure {
        lines.push(match &c.counterexample {
            None => format!("  {} preserves the hull", c.symbol),
            Some(args) => format!("  {} leaves the hull at ({})", c.symbol, args.join(", ")),
        });
    }
    let record = json!({ "command": "hull", "closed": report.is_closed(), "hull": to_json(&report) });
    Ok(Report::new(record, lines))
}

fn closure_lines(c: &ClosureCheck) -> Vec<String> {
    match c {
        ClosureCheck::WitnessScheme { entries, rules } => {
            let mut out = vec![format!("witness scheme: {} tabulated entries", entries.len())];
            out.extend(rules.iter().map(|r| format!("  {r}")));
            out
        }
        ClosureCheck::CounterExample {
            symbol,
            member,
            tuple,
            value,
            ..
        } => vec![format!(
            "counterexample: in member {member}, {symbol}({}) = {value} lies outside the hull up to the search depth",
            tuple.join(", ")
        )],
        ClosureCheck::Inconclusive { reason } => vec![format!("inconclusive ({reason})")],
    }
}

pub fn closed_check(
    structures: &[PathBuf],
    torsion_theory: bool,
    gamma: &GammaArgs,
    depth: usize,
) -> Result<Report, CliError> {
    let family = structures.iter().map(|p| input::load_finite(p)).collect::<Result<Vec<_>, _>>()?;
    let result = if torsion_theory {
        let g = gamma.build(&Signature::module())?;
        check_gamma_closed(&ClosureSubject::Theory(TheoryTag::Torsion), &g, depth)?
    } else {
        let first = family
            .first()
            .ok_or_else(|| CliError::Usage("give --structure at least once, or --theory torsion".into()))?;
        let g = gamma.build(&first.signature)?;
        check_gamma_closed(&ClosureSubject::Family(&family), &g, depth)?
    };
    let record = json!({ "command": "closed-check", "depth": depth, "result": to_json(&result) });
    Ok(Report::new(record, closure_lines(&result)))
}

pub fn nice_check(
    structures: &[PathBuf],
    formulas: &[String],
    gamma: &GammaArgs,
    depth: usize,
) -> Result<Report, CliError> {
    let family = structures.iter().map(|p| input::load_finite(p)).collect::<Result<Vec<_>, _>>()?;
    let first = family
        .first()
        .ok_or_else(|| CliError::Usage("give --structure at least once".into()))?;
    let sig = first.signature.clone();
    let fs = formulas.iter().map(|f| input::formula(f, &sig)).collect::<Result<Vec<_>, _>>()?;
    let result = check_gamma_nice(&family, &gamma.build(&sig)?, &fs, depth)?;
    let record = json!({ "command": "nice-check", "depth": depth, "result": to_json(&result) });
    Ok(Report::new(record, closure_lines(&result)))
}

fn transfer_lines(r: &TransferReport) -> Vec<String> {
    let mut out = vec![format!(
        "atom {}: hull of {} elements, collapse {}",
        r.atom,
        r.hull.elements.len(),
        if r.collapse.holds() { "holds" } else { "fails" }
    )];
    for f in &r.formulas {
        out.push(match &f.skipped {
            Some(why) => format!("  {} [{}]: skipped ({why})", f.formula, f.class),
            None => format!(
                "  {} [{}]: {} samples, {} left-to-right and {} right-to-left failures",
                f.formula, f.class, f.samples, f.lr_failures, f.rl_failures
            ),
        });
    }
    out
}

pub struct LosArgs {
    pub context: Option<PathBuf>,
    pub structures: Vec<PathBuf>,
    pub atom: usize,
    pub formulas: Vec<String>,
    pub samples: usize,
}

pub fn los_verify(a: &LosArgs) -> Result<Report, CliError> {
    let sampling = Sampling {
        max_tuples: a.samples,
        seed: input::seed()?,
    };
    match (&a.context, a.structures.is_empty()) {
        (Some(path), true) => {
            let ctx = input::load_context(path)?;
            let sig = ctx.family.member(0)?.signature();
            let fs = a.formulas.iter().map(|f| input::formula(f, &sig)).collect::<Result<Vec<_>, _>>()?;
            let report = verify_los_finite(&ctx, &fs, sampling)?;
            let record = json!({ "command": "los-verify", "seed": sampling.seed, "report": to_json(&report) });
            Ok(Report::new(record, transfer_lines(&report)))
        }
        (None, false) => {
            let family = a.structures.iter().map(|p| input::load_torsion(p)).collect::<Result<Vec<_>, _>>()?;
            let sig = Signature::module();
            let fs = a.formulas.iter().map(|f| input::formula(f, &sig)).collect::<Result<Vec<_>, _>>()?;
            let report = tor_los_pp_verify(&family, a.atom, &fs, sampling)?;
            let mut lines = vec![format!(
                "torsion transfer over {} ({}isomorphic members, tor depth {}): {}",
                report.surrogate,
                if report.isomorphic { "" } else { "non-" },
                report.tor_depth,
                if report.holds() { "holds" } else { "fails" }
            )];
            lines.extend(transfer_lines(&report.transfer));
            for t in &report.invariants {
                lines.push(format!(
                    "  {}: large side {}, product {}",
                    t.sentence, t.large, t.product_truth
                ));
            }
            let record = json!({ "command": "los-verify", "seed": sampling.seed, "holds": report.holds(), "report": to_json(&report) });
            Ok(Report::new(record, lines))
        }
        _ => Err(CliError::Usage(
            "give either --context, or --structure once per torsion family member".into(),
        )),
    }
}

pub fn tor_ee(structures: &[PathBuf], bound: u32, cap: u64) -> Result<Report, CliError> {
    let [g, h] = structures else {
        return Err(CliError::Usage("tor-ee compares exactly two --structure files".into()));
    };
    let (g, h) = (input::load_torsion(g)?, input::load_torsion(h)?);
    let verdict = ee_invariants_check(&g, &h, bound, cap)?;
    let line = match &verdict {
        EeVerdict::Equivalent { pairs, .. } => {
            format!("equivalent at bound {bound}, cap {cap} ({pairs} pairs compared)")
        }
        EeVerdict::Distinguished { phi, psi, values } => {
            format!("distinguished by Inv({phi}, {psi}): {} vs {}", values.0, values.1)
        }
    };
    let record = json!({ "command": "tor-ee", "bound": bound, "cap": cap, "verdict": to_json(&verdict) });
    Ok(Report::new(record, vec![line]))
}

pub fn dividing(structure: &Path) -> Result<Report, CliError> {
    let g = input::load_torsion(structure)?;
    let verdict = dividing_line(&g);
    let lines = match &verdict {
        DividingLine::CaseA { certificates } => {
            let mut out = vec!["case A: no bound n has infinitely many elements of order dividing n".to_string()];
            out.extend(certificates.iter().map(|c| format!("  {c}")));
            out
        }
        DividingLine::CaseB { n, family } => {
            vec![format!("case B: infinitely many elements of order dividing {n} ({family})")]
        }
    };
    let record = json!({ "command": "dividing-line", "verdict": to_json(&verdict) });
    Ok(Report::new(record, lines))
}
