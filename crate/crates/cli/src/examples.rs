//! The scripted worked examples: each runs one library computation and
//! compares a short verdict string against the expected outcome.

use std::time::Instant;

use gamma_ultra::catalog;
use gamma_ultra::formula::{parse_formula, InvCondition, Signature, UnaryPP, UnaryTypePresentation};
use gamma_ultra::structures::{FiniteStructure, StructureHandle, TorsionGroup, Value};
use gamma_ultra::torsion::{
    dividing_line, ee_invariants_check, tor_divisibility, tor_los_pp_verify, tor_membership, DividingLine,
    DivisibilityVerdict, EeVerdict,
};
use gamma_ultra::ultraproduct::{
    check_gamma_closed, gamma_hull, gup_sum_check, membership_check, ultrapower_collapse_check, verify_los_finite,
    ClosureCheck, ClosureSubject, CollapseVerdict, DefinableSequence, Family, GammaContext, MembershipVerdict,
    Sampling, SatSet, TheoryTag, UltrafilterDescriptor,
};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Undecided,
}

/// One example's result. `elapsed_ms` is only filled in on request, so the
/// default report is byte-for-byte reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct ExampleOutcome {
    pub id: &'static str,
    pub description: &'static str,
    pub expected: String,
    pub computed: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

type Run = fn() -> Result<String, String>;

pub struct Example {
    pub id: &'static str,
    pub description: &'static str,
    pub expected: &'static str,
    run: Run,
}

const fn example(id: &'static str, description: &'static str, expected: &'static str, run: Run) -> Example {
    Example {
        id,
        description,
        expected,
        run,
    }
}

/// Every example, sorted by id.
pub const EXAMPLES: &[Example] = &[
    example(
        "dividing-line",
        "which countable torsion groups have infinitely many elements of some bounded order",
        "tail-sum:B omega-z2:B cyclic-sum:B prufer:A q-mod-z:A",
        dividing_line_cases,
    ),
    example(
        "escape-closure-counterexample",
        "F maps the hull {a} of ~R(x) to b, so no closure scheme exists",
        "counterexample F(a) = b",
        escape_counterexample,
    ),
    example(
        "escape-hull-not-closed",
        "the hull of ~R(x) in the two-element structure is {a} and F leaves it",
        "hull {a}, F leaves at a",
        escape_hull,
    ),
    example(
        "eval-z2-exponent",
        "forall x. x + x = 0 in Z_2",
        "true",
        eval_z2_exponent,
    ),
    example(
        "eval-z4-order-two",
        "exists x. 2*x = 0 & ~(x = 0) in Z_4",
        "true",
        eval_z4_order_two,
    ),
    example(
        "generator-not-tor-member",
        "n -> 1 in Z_{2^{n+1}} has no uniform order",
        "not a member",
        generator_not_member,
    ),
    example(
        "inv-tail-sum",
        "Inv(x = x, 2^1 | x) over the sum of Z_{2^n}, n >= 1",
        "infinite",
        inv_tail_sum,
    ),
    example(
        "invariants-sentence-z4",
        "Inv(x = x, 2^1 | x) >= 2 holds in Z_4 and fails in Z_3",
        "true false",
        invariants_sentence,
    ),
    example(
        "naturals-ultrapower-collapses",
        "omitting the type of an element above every numeral collapses the ultrapower of N",
        "collapses",
        naturals_collapse,
    ),
    example(
        "odd-constant-not-divisible",
        "the constant generator of Z_2 in the sum of Z_{2^n} is not 2-divisible but is 3-divisible",
        "order 2, 2^1 fails, 3^2 holds",
        odd_constant,
    ),
    example(
        "order-two-divisible",
        "n -> 2^n in Z_{2^{n+1}} is divisible by 2^k for every k <= 20",
        "divisible for k = 1..20",
        order_two_divisible,
    ),
    example(
        "order-two-tor-member",
        "n -> 2^n in Z_{2^{n+1}} has uniform order 2",
        "member of order 2 on all indices",
        order_two_member,
    ),
    example(
        "permuted-presentations-equivalent",
        "Z_2 + Z_4 and Z_4 + Z_2 agree on every invariant at bound 2",
        "equivalent",
        permuted_equivalent,
    ),
    example(
        "surrogate-existential",
        "an existential formula true in the factors fails in the two-sorted surrogate's product",
        "left-to-right failures only",
        surrogate_existential,
    ),
    example(
        "tail-sum-plus-z2-distinguished",
        "adding a Z_2 summand to the sum of Z_{2^n} changes an invariant",
        "distinguished 2 vs 4",
        tail_sum_plus_z2,
    ),
    example(
        "tor-los-pp",
        "p.p. formulas and an invariants sentence transfer over two copies of Z_2 + Z_4",
        "holds",
        tor_los_pp,
    ),
    example(
        "torsion-closure-scheme",
        "torsion modules are closed for the torsion type with g_+(n, m) = n*m",
        "witness scheme",
        torsion_scheme,
    ),
    example(
        "two-adic-powers-escape",
        "n -> 2^n omits no formula of the 2-adic type",
        "not a member, certificates {0..k-1} for k = 1..8",
        two_adic_powers,
    ),
    example(
        "two-adic-proper-extension",
        "omitting the 2-adic type leaves the ultrapower of N a proper extension",
        "proper extension",
        two_adic_proper,
    ),
    example(
        "two-adic-sum-escapes",
        "1 and 2^n - 1 are members but their sum 2^n is not",
        "members 1 and 2^n - 1, sum not a member",
        two_adic_sum,
    ),
    example(
        "z4-vs-klein",
        "Z_4 and Z_2 + Z_2 are told apart by an invariant",
        "distinguished by Inv(2^1 | x, x = 0): 2 vs 1",
        z4_vs_klein,
    ),
    example(
        "z6-copies-los",
        "three copies of Z_6 with the torsion type: every sampled formula transfers",
        "holds",
        z6_copies,
    ),
];

/// Run the examples whose ids are in `filter` (all when empty), in id
/// order. Unknown ids are an error.
pub fn run(filter: &[String], timings: bool) -> Result<Vec<ExampleOutcome>, String> {
    if let Some(bad) = filter.iter().find(|id| !EXAMPLES.iter().any(|e| e.id == id.as_str())) {
        return Err(format!("unknown example id `{bad}`"));
    }
    let selected: Vec<&Example> = EXAMPLES
        .iter()
        .filter(|e| filter.is_empty() || filter.iter().any(|id| id == e.id))
        .collect();
    let mut out: Vec<ExampleOutcome> = selected
        .par_iter()
        .map(|e| {
            let start = Instant::now();
            let computed = match std::panic::catch_unwind(e.run) {
                Ok(Ok(v)) => v,
                Ok(Err(msg)) => format!("error: {msg}"),
                Err(_) => "error: panicked".to_string(),
            };
            let status = if computed == e.expected {
                Status::Pass
            } else if computed.starts_with("undecided") {
                Status::Undecided
            } else {
                Status::Fail
            };
            ExampleOutcome {
                id: e.id,
                description: e.description,
                expected: e.expected.to_string(),
                computed,
                status,
                elapsed_ms: timings.then(|| start.elapsed().as_millis()),
            }
        })
        .collect();
    out.sort_by_key(|o| o.id);
    Ok(out)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn dividing_line_cases() -> Result<String, String> {
    let groups = [
        ("tail-sum", catalog::tail_sum(2)),
        ("omega-z2", catalog::omega_copies(2, 1)),
        ("cyclic-sum", catalog::cyclic_sum_encoding()),
        ("prufer", catalog::prufer(2)),
        ("q-mod-z", catalog::rationals_mod_integers()),
    ];
    let cases: Vec<String> = groups
        .iter()
        .map(|(name, g)| {
            let case = match dividing_line(g) {
                DividingLine::CaseA { .. } => "A",
                DividingLine::CaseB { .. } => "B",
            };
            format!("{name}:{case}")
        })
        .collect();
    Ok(cases.join(" "))
}

fn escape_counterexample() -> Result<String, String> {
    let family = [catalog::escape_structure()];
    match check_gamma_closed(&ClosureSubject::Family(&family), &[catalog::not_r_type()], 4).map_err(err)? {
        ClosureCheck::CounterExample {
            symbol, tuple, value, ..
        } => Ok(format!("counterexample {symbol}({}) = {value}", tuple.join(", "))),
        ClosureCheck::WitnessScheme { .. } => Ok("witness scheme".into()),
        ClosureCheck::Inconclusive { reason } => Ok(format!("undecided ({reason})")),
    }
}

fn escape_hull() -> Result<String, String> {
    let m = StructureHandle::Finite(catalog::escape_structure());
    let h = gamma_hull(&m, &[catalog::not_r_type()]).map_err(err)?;
    let mut out = format!("hull {{{}}}", h.elements.join(", "));
    for c in &h.closure {
        if let Some(args) = &c.counterexample {
            out.push_str(&format!(", {} leaves at {}", c.symbol, args.join(", ")));
        }
    }
    Ok(out)
}

fn eval_sentence(moduli: &[u64], text: &str) -> Result<String, String> {
    let m = FiniteStructure::abelian_group(moduli).map_err(err)?;
    let f = parse_formula(text, &m.signature).map_err(err)?;
    Ok(m.eval(&f, &Default::default()).map_err(err)?.to_string())
}

fn eval_z2_exponent() -> Result<String, String> {
    eval_sentence(&[2], "forall x. x + x = 0")
}

fn eval_z4_order_two() -> Result<String, String> {
    eval_sentence(&[4], "exists x. 2*x = 0 & ~(x = 0)")
}

fn generator_not_member() -> Result<String, String> {
    let ctx = catalog::two_power_family(4);
    let v = tor_membership(&ctx, &catalog::generator_sequence()).map_err(err)?;
    Ok(match v.member() {
        Some(m) => format!("member of order {}", m.order),
        None => "not a member".into(),
    })
}

fn inv_tail_sum() -> Result<String, String> {
    let g = StructureHandle::Torsion(catalog::tail_sum(2));
    let phi = UnaryPP::parse("x = x").map_err(err)?;
    let psi = UnaryPP::parse("2^1 | x").map_err(err)?;
    Ok(g.compute_inv(&phi, &psi, &BigUint::from(8u32)).map_err(err)?.to_string())
}

fn invariants_sentence() -> Result<String, String> {
    let cond = InvCondition::at_least(UnaryPP::trivial(), UnaryPP::div(2, 1, 1), 2);
    let f = cond.to_formula();
    let recognized = InvCondition::from_formula(&f).ok_or("the sentence is not recognized")?;
    let truth = |g: TorsionGroup| StructureHandle::Torsion(g).eval_invariants_sentence(&recognized);
    let z4 = truth(TorsionGroup::finite(&[(2, 2)]).map_err(err)?).map_err(err)?;
    let z3 = truth(TorsionGroup::finite(&[(3, 1)]).map_err(err)?).map_err(err)?;
    Ok(format!("{z4} {z3}"))
}

fn collapse_word(v: &CollapseVerdict) -> String {
    match v {
        CollapseVerdict::Collapses { .. } => "collapses".into(),
        CollapseVerdict::ProperExtension { .. } => "proper extension".into(),
        CollapseVerdict::Undecided { reason } => format!("undecided ({reason})"),
    }
}

fn naturals_collapse() -> Result<String, String> {
    Ok(collapse_word(&ultrapower_collapse_check(&catalog::boundedness_context(8)).map_err(err)?))
}

fn two_adic_proper() -> Result<String, String> {
    Ok(collapse_word(&ultrapower_collapse_check(&catalog::two_adic_context(8)).map_err(err)?))
}

fn divisibility_word(v: &DivisibilityVerdict) -> &'static str {
    match v {
        DivisibilityVerdict::Holds { .. } => "holds",
        DivisibilityVerdict::Fails { .. } => "fails",
        DivisibilityVerdict::Undecided { .. } => "undecided",
    }
}

fn odd_constant() -> Result<String, String> {
    let g = catalog::tail_sum(2);
    let ctx = GammaContext::new(
        Family::ConstantPower(StructureHandle::Torsion(g.clone())),
        UltrafilterDescriptor::Frechet,
        vec![UnaryTypePresentation::tor(4)],
    )
    .map_err(err)?;
    let one = DefinableSequence::constant(Value::Tor(g.unit(0, 0, 1).map_err(err)?));
    let order = match tor_membership(&ctx, &one).map_err(err)?.member() {
        Some(m) => m.order.to_string(),
        None => return Ok("not a member".into()),
    };
    let two = tor_divisibility(&ctx, &one, 2, 1).map_err(err)?;
    let three = tor_divisibility(&ctx, &one, 3, 2).map_err(err)?;
    Ok(format!(
        "order {order}, 2^1 {}, 3^2 {}",
        divisibility_word(&two),
        divisibility_word(&three)
    ))
}

fn order_two_divisible() -> Result<String, String> {
    let ctx = catalog::two_power_family(4);
    let f = catalog::order_two_sequence();
    for k in 1..=20 {
        let v = tor_divisibility(&ctx, &f, 2, k).map_err(err)?;
        if !v.holds() {
            return Ok(format!("2^{k} {}", divisibility_word(&v)));
        }
    }
    Ok("divisible for k = 1..20".into())
}

fn order_two_member() -> Result<String, String> {
    let ctx = catalog::two_power_family(4);
    let v = tor_membership(&ctx, &catalog::order_two_sequence()).map_err(err)?;
    Ok(match v.member() {
        Some(m) if m.large_set == SatSet::cofinite([]) => format!("member of order {} on all indices", m.order),
        Some(m) => format!("member of order {} on {}", m.order, m.large_set),
        None => "not a member".into(),
    })
}

fn ee_word(v: &EeVerdict) -> String {
    match v {
        EeVerdict::Equivalent { .. } => "equivalent".into(),
        EeVerdict::Distinguished { values, .. } => format!("distinguished {} vs {}", values.0, values.1),
    }
}

fn finite_group(factors: &[(u64, u32)]) -> Result<TorsionGroup, String> {
    TorsionGroup::finite(factors).map_err(err)
}

fn permuted_equivalent() -> Result<String, String> {
    let g = finite_group(&[(2, 1), (2, 2)])?;
    let h = finite_group(&[(2, 2), (2, 1)])?;
    Ok(ee_word(&ee_invariants_check(&g, &h, 2, 4).map_err(err)?))
}

fn tail_sum_plus_z2() -> Result<String, String> {
    let tail = catalog::tail_sum(2);
    let mut summands = tail.summands.clone();
    summands.extend(finite_group(&[(2, 1)])?.summands);
    let bigger = TorsionGroup::new(summands).map_err(err)?;
    Ok(ee_word(&ee_invariants_check(&tail, &bigger, 2, 4).map_err(err)?))
}

fn z4_vs_klein() -> Result<String, String> {
    let v = ee_invariants_check(&finite_group(&[(2, 2)])?, &finite_group(&[(2, 1), (2, 1)])?, 2, 4).map_err(err)?;
    Ok(match v {
        EeVerdict::Distinguished { phi, psi, values } => {
            format!("distinguished by Inv({phi}, {psi}): {} vs {}", values.0, values.1)
        }
        EeVerdict::Equivalent { .. } => "equivalent".into(),
    })
}

fn surrogate_existential() -> Result<String, String> {
    let ctx = catalog::surrogate_context(2).map_err(err)?;
    let sig = catalog::surrogate_structure().signature;
    let psi = parse_formula(catalog::SURROGATE_FORMULA, &sig).map_err(err)?;
    let r = verify_los_finite(&ctx, &[psi], Sampling::default()).map_err(err)?;
    let f = &r.formulas[0];
    Ok(match (f.lr_failures > 0, f.rl_failures > 0) {
        (true, false) => "left-to-right failures only".into(),
        (false, false) => "transfers".into(),
        (false, true) => "right-to-left failures only".into(),
        (true, true) => "failures in both directions".into(),
    })
}

fn tor_los_pp() -> Result<String, String> {
    let g = finite_group(&[(2, 1), (2, 2)])?;
    let sig = Signature::module();
    let mut formulas = ["2^1 | x", "~(2^1 | x) | (2*x = 0)", "exists y. 2*y = x"]
        .iter()
        .map(|s| parse_formula(s, &sig).map_err(err))
        .collect::<Result<Vec<_>, _>>()?;
    formulas.push(InvCondition::at_least(UnaryPP::trivial(), UnaryPP::div(2, 1, 1), 2).to_formula());
    let r = tor_los_pp_verify(&[g.clone(), g], 1, &formulas, Sampling::default()).map_err(err)?;
    Ok(if r.holds() { "holds" } else { "fails" }.into())
}

fn torsion_scheme() -> Result<String, String> {
    let tor = [UnaryTypePresentation::tor(6)];
    match check_gamma_closed(&ClosureSubject::Theory(TheoryTag::Torsion), &tor, 6).map_err(err)? {
        ClosureCheck::WitnessScheme { rules, .. } if rules.iter().any(|r| r == "g_+(n, m) = n*m") => {
            Ok("witness scheme".into())
        }
        ClosureCheck::WitnessScheme { .. } => Ok("witness scheme without the sum rule".into()),
        ClosureCheck::CounterExample { .. } => Ok("counterexample".into()),
        ClosureCheck::Inconclusive { reason } => Ok(format!("undecided ({reason})")),
    }
}

fn membership_word(v: &MembershipVerdict) -> String {
    match v {
        MembershipVerdict::Member { .. } => "member".into(),
        MembershipVerdict::NotMember { .. } => "not a member".into(),
        MembershipVerdict::Undecided { reason } => format!("undecided ({reason})"),
    }
}

fn two_adic_powers() -> Result<String, String> {
    let ctx = catalog::two_adic_context(8);
    let v = membership_check(&ctx, &DefinableSequence::geometric(1, 2, 0)).map_err(err)?;
    let MembershipVerdict::NotMember { certificates, .. } = &v else {
        return Ok(membership_word(&v));
    };
    let expected = certificates
        .iter()
        .enumerate()
        .all(|(j, c)| c.set == SatSet::finite(0..j as u64 + 1));
    Ok(if expected && certificates.len() == 8 {
        "not a member, certificates {0..k-1} for k = 1..8".into()
    } else {
        format!(
            "not a member, certificates {}",
            certificates.iter().map(|c| c.set.to_string()).collect::<Vec<_>>().join("; ")
        )
    })
}

fn two_adic_sum() -> Result<String, String> {
    let ctx = catalog::two_adic_context(8);
    let one = DefinableSequence::constant(Value::Nat(1u32.into()));
    let odd = DefinableSequence::geometric(1, 2, -1);
    let a = membership_word(&membership_check(&ctx, &one).map_err(err)?);
    let b = membership_word(&membership_check(&ctx, &odd).map_err(err)?);
    let sum = membership_word(&gup_sum_check(&ctx, "+", &one, &odd).map_err(err)?);
    if a == "member" && b == "member" {
        Ok(format!("members 1 and 2^n - 1, sum {sum}"))
    } else {
        Ok(format!("1: {a}, 2^n - 1: {b}, sum: {sum}"))
    }
}

fn z6_copies() -> Result<String, String> {
    let m = StructureHandle::Finite(FiniteStructure::cyclic_group(6).map_err(err)?);
    let ctx = GammaContext::allowing_realizations(
        Family::Finite(vec![m.clone(), m.clone(), m.clone()]),
        UltrafilterDescriptor::Principal { size: 3, atom: 0 },
        vec![UnaryTypePresentation::tor(6)],
    )
    .map_err(err)?;
    let sig = m.signature();
    let formulas = [
        "forall y. x + y = y + x",
        "forall y. (y + y = 0 -> y = 0 | y = x)",
        "x + x = 0",
        "~(x = 1)",
    ]
    .iter()
    .map(|t| parse_formula(t, &sig).map_err(err))
    .collect::<Result<Vec<_>, _>>()?;
    let r = verify_los_finite(&ctx, &formulas, Sampling::default()).map_err(err)?;
    let ok = r.collapse.holds()
        && r
            .formulas
            .iter()
            .all(|f| f.skipped.is_none() && f.lr_failures == 0 && f.rl_failures == 0 && f.samples > 0);
    Ok(if ok { "holds" } else { "fails" }.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_sorted_and_unique() {
        let ids: Vec<&str> = EXAMPLES.iter().map(|e| e.id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn unknown_ids_are_rejected() {
        assert!(run(&["no-such-example".into()], false).is_err());
    }

    #[test]
    fn filtering_selects_only_the_named_examples() {
        let out = run(&["eval-z2-exponent".into()], false).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].status, Status::Pass);
        assert!(out[0].elapsed_ms.is_none());
    }
}
