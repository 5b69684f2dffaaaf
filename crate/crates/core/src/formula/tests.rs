use num_bigint::BigInt;
use proptest::prelude::*;

use super::*;

fn group() -> Signature {
    Signature::module()
}

fn with_r() -> Signature {
    let mut sig = Signature::module();
    sig.relations.push(("R".into(), 1));
    sig.functions.push(("F".into(), 1));
    sig
}

fn p(text: &str) -> Formula {
    parse_formula(text, &group()).unwrap()
}

#[test]
fn parses_universal_group_law() {
    let f = p("forall x. x + x = 0");
    let expected = Formula::forall(
        "x",
        Formula::eq(Term::add(Term::var("x"), Term::var("x")), Term::zero()),
    );
    assert_eq!(f, expected);
}

#[test]
fn parses_divisibility_sugar() {
    let f = p("2^3 | 4*x");
    assert_eq!(f, Formula::divides(2, 3, Term::scalar(4, Term::var("x"))));
}

#[test]
fn unmatched_parenthesis_is_a_syntax_error() {
    let err = parse_formula("forall x. (x = x", &group()).unwrap_err();
    match err {
        FormulaError::Syntax { pos, found, .. } => {
            assert_eq!(pos, 16);
            assert_eq!(found, "end of input");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn undeclared_and_arity_errors() {
    assert_eq!(
        parse_formula("G(x) = x", &group()).unwrap_err(),
        FormulaError::Undeclared("G".into())
    );
    assert!(matches!(
        parse_formula("R(x, x)", &with_r()).unwrap_err(),
        FormulaError::Arity { expected: 1, found: 2, .. }
    ));
    assert!(matches!(
        parse_formula("4^1 | x", &group()).unwrap_err(),
        FormulaError::BadDivisor { .. }
    ));
    let plain = Signature::new("plain", vec![("f".into(), 1)], vec![], None).unwrap();
    assert!(matches!(
        parse_formula("2*x = x", &plain).unwrap_err(),
        FormulaError::NoScalars { .. }
    ));
}

#[test]
fn precedence_and_associativity() {
    let f = p("x = 0 | x = x & ~x = 0 -> x = x -> x = 0");
    // (((x=0) | ((x=x) & ~(x=0))) -> x=x) -> x=0
    match f {
        Formula::Implies(lhs, _) => match *lhs {
            Formula::Implies(inner, _) => assert!(matches!(*inner, Formula::Or(..))),
            other => panic!("{other:?}"),
        },
        other => panic!("{other:?}"),
    }
}

#[test]
fn parenthesized_terms_and_formulas() {
    let f = p("(x + -x) = 0 & (2^1 | x)");
    assert!(matches!(f, Formula::And(..)));
    let g = p("exists y. (y + y = x)");
    assert!(matches!(g, Formula::Exists(..)));
}

#[test]
fn classification_examples() {
    assert_eq!(classify_quantifier(&p("forall x. exists y. x + y = 0")), QuantClass::ForallExists);
    assert_eq!(classify_quantifier(&p("exists y. 8*y = 4*x")), QuantClass::PP);
    assert_eq!(classify_quantifier(&p("forall x. x = x")), QuantClass::Universal);
    assert_eq!(classify_quantifier(&p("x = 0 | ~(x + x = 0)")), QuantClass::QuantifierFree);
    assert_eq!(classify_quantifier(&p("~(2^1 | x) | 2*x = 0")), QuantClass::BoolPP);
    assert_eq!(classify_quantifier(&p("exists y. forall z. y + z = z")), QuantClass::ExistsForall);
    assert_eq!(classify_quantifier(&p("exists y. y + y = y")), QuantClass::Existential);
    assert_eq!(classify_quantifier(&p("exists y. forall z. exists w. y + z = w")), QuantClass::Other);
    // A negated divisibility atom hides a universal quantifier.
    assert_eq!(
        classify_quantifier(&p("forall x. ~(2^1 | x)")),
        QuantClass::Universal
    );
}

#[test]
fn recognize_pp_examples() {
    let pp = recognize_pp(&p("(2^3 | x) & (6*x = 0)")).unwrap();
    assert_eq!(
        pp.conds,
        vec![
            PPCond::Div { prime: 2, exp: 3, tau: LinComb::var("x") },
            PPCond::Ann { tau: LinComb::var("x").scale(&BigInt::from(6)) },
        ]
    );
    let not = recognize_pp(&p("~(2^1 | x)")).unwrap_err();
    assert_eq!(not.reason, "negation");
    let ann = recognize_pp(&p("x = 0")).unwrap();
    assert_eq!(ann.conds, vec![PPCond::Ann { tau: LinComb::var("x") }]);
    // `exists y. 6*y = x` is not of the per-prime-power shape.
    assert!(recognize_pp(&p("exists y. 6*y = x")).is_err());
}

#[test]
fn psi_ell_shapes() {
    let tor = UnaryTypePresentation::tor(4);
    let psi = build_psi_ell(&[tor], 2).unwrap();
    assert_eq!(psi, p("(1*x = 0) | (2*x = 0)"));

    let sig = with_r();
    let phi0 = parse_formula("~R(x)", &sig).unwrap();
    let ty = UnaryTypePresentation::listed("p", "x", vec![phi0]).unwrap();
    assert_eq!(build_psi_ell(std::slice::from_ref(&ty), 1).unwrap(), parse_formula("R(x)", &sig).unwrap());
    assert!(matches!(
        build_psi_ell(&[ty], 2),
        Err(FormulaError::TruncationTooShallow { have: 1, need: 2, .. })
    ));
}

#[test]
fn type_presentations_are_unary() {
    let f = p("x + y = 0");
    assert!(UnaryTypePresentation::listed("bad", "x", vec![f]).is_err());
    let tor = UnaryTypePresentation::tor(3);
    assert_eq!(tor.formulas().len(), 3);
    assert_eq!(tor.formula(2).unwrap(), p("~(3*x = 0)"));
    let all = ChoiceFunction::enumerate(&[tor.clone(), UnaryTypePresentation::tor(2)]);
    assert_eq!(all.len(), 6);
    assert_eq!(all[1], ChoiceFunction(vec![0, 1]));
}

#[test]
fn invariants_sentence_shapes_round_trip() {
    let cond = InvCondition::at_least(UnaryPP::trivial(), UnaryPP::div(2, 1, 1), 3);
    let f = cond.to_formula();
    assert_eq!(classify_quantifier(&f), QuantClass::InvariantsSentence);
    assert_eq!(InvCondition::from_formula(&f), Some(cond.clone()));
    let neg = cond.negate();
    assert_eq!(InvCondition::from_formula(&neg.to_formula()), Some(neg));
    let reparsed = parse_formula(&print_formula(&f), &group()).unwrap();
    assert_eq!(InvCondition::from_formula(&reparsed), Some(cond));
    let g = InvCondition::at_least(UnaryPP::ann(2), UnaryPP::trivial(), 2);
    assert_eq!(InvCondition::from_formula(&g.to_formula()), Some(g));
}

#[test]
fn substitution_avoids_capture() {
    let f = p("exists y. y + x = 0");
    let g = f.substitute("x", &Term::var("y"));
    assert_eq!(g.free_vars().into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
    match g {
        Formula::Exists(v, _) => assert_ne!(v, "y"),
        _ => unreachable!(),
    }
}

#[test]
fn prenex_renames_canonically() {
    let pr = prenex(&p("(forall a. a = x) & (exists b. b = x)"));
    let names: Vec<_> = pr.prefix.iter().map(|(_, v)| v.as_str()).collect();
    assert_eq!(names, vec!["x1", "x0"]);
    assert_eq!(prefix_class(&pr), QuantClass::ExistsForall);
}

fn arb_term(depth: u32) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
        Just(Term::zero()),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            inner.clone().prop_map(Term::neg),
            (-5i64..6, inner.clone()).prop_map(|(k, t)| Term::scalar(k, t)),
            inner.prop_map(|t| Term::app("F", vec![t])),
        ]
    })
    .boxed()
}

fn arb_formula() -> BoxedStrategy<Formula> {
    let atom = prop_oneof![
        (arb_term(2), arb_term(2)).prop_map(|(a, b)| Formula::eq(a, b)),
        arb_term(2).prop_map(|t| Formula::rel("R", vec![t])),
        (prop::sample::select(vec![2u64, 3, 5]), 1u32..4, arb_term(2))
            .prop_map(|(p, n, t)| Formula::divides(p, n, t)),
    ];
    atom.prop_recursive(4, 24, 2, |inner| {
        let var = prop::sample::select(vec!["x", "y", "w"]);
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (var.clone(), inner.clone()).prop_map(|(v, b)| Formula::forall(v, b)),
            (var, inner).prop_map(|(v, b)| Formula::exists(v, b)),
        ]
    })
    .boxed()
}

proptest! {
    #[test]
    fn print_parse_round_trip(f in arb_formula()) {
        let text = print_formula(&f);
        let back = parse_formula(&text, &with_r()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn universal_class_has_no_existentials(f in arb_formula()) {
        let pr = prenex(&f);
        match classify_quantifier(&f) {
            QuantClass::Universal => prop_assert!(pr.prefix.iter().all(|(q, _)| *q == Quantifier::Forall)),
            QuantClass::Existential => prop_assert!(pr.prefix.iter().all(|(q, _)| *q == Quantifier::Exists)),
            _ => {}
        }
        prop_assert!(pr.matrix.is_quantifier_free());
    }

    #[test]
    fn pp_recognition_is_invariant_under_conjunct_order(
        conds in prop::collection::vec((0u8..2, 1i64..9, 1u32..4), 1..5),
        seed in any::<u64>(),
    ) {
        let parts: Vec<Formula> = conds.iter().map(|(kind, c, n)| {
            let t = Term::scalar(*c, Term::var("x"));
            if *kind == 0 { Formula::divides(2, *n, t) } else { Formula::eq(t, Term::zero()) }
        }).collect();
        let mut shuffled = parts.clone();
        let len = shuffled.len();
        shuffled.rotate_left((seed as usize) % len);
        let a = recognize_pp(&Formula::conj(parts).unwrap()).unwrap().unary().unwrap();
        let b = recognize_pp(&Formula::conj(shuffled).unwrap()).unwrap().unary().unwrap();
        prop_assert_eq!(a, b);
    }
}
