use super::*;
use crate::catalog;
use crate::structures::FiniteStructure;
use crate::formula::{parse_formula, ChoiceFunction, UnaryTypePresentation};
use crate::structures::{Affine, Multiplicity, StructureHandle, Summand, TorsionElement, TorsionGroup, Value};

fn two_adic_context() -> GammaContext {
    catalog::two_adic_context(8)
}

fn nat(n: u64) -> Value {
    Value::Nat(n.into())
}

#[test]
fn constant_one_is_a_member() {
    let ctx = two_adic_context();
    let v = membership_check(&ctx, &DefinableSequence::constant(nat(1))).unwrap();
    assert_eq!(
        v,
        MembershipVerdict::Member {
            witness: ChoiceFunction(vec![0]),
            large_set: SatSet::cofinite([]),
        }
    );
}

#[test]
fn odd_geometric_sequence_is_a_member() {
    let ctx = two_adic_context();
    let v = membership_check(&ctx, &DefinableSequence::geometric(1, 2, -1)).unwrap();
    let MembershipVerdict::Member { witness, large_set } = v else { panic!("{v:?}") };
    assert_eq!(witness, ChoiceFunction(vec![0]));
    // 2^0 - 1 = 0 is divisible by 2 but excluded by x != 0.
    assert_eq!(large_set, SatSet::cofinite([]));
}

#[test]
fn powers_of_two_are_not_members() {
    let ctx = two_adic_context();
    let v = membership_check(&ctx, &DefinableSequence::geometric(1, 2, 0)).unwrap();
    let MembershipVerdict::NotMember {
        certificates,
        conclusive_for_all_depths,
        depth,
        ..
    } = v
    else {
        panic!("{v:?}")
    };
    assert_eq!(depth, 8);
    assert!(conclusive_for_all_depths);
    for (j, c) in certificates.iter().enumerate() {
        let k = j as u64 + 1;
        assert_eq!(c.set, SatSet::finite(0..k), "formula {j}");
    }
}

#[test]
fn sum_of_members_escapes() {
    let ctx = two_adic_context();
    let f = DefinableSequence::constant(nat(1));
    let g = DefinableSequence::geometric(1, 2, -1);
    assert!(gup_sum_check(&ctx, "+", &f, &g).unwrap().is_not_member());
    let zero = DefinableSequence::constant(nat(0));
    // 0 fails x != 0, hence every formula of the type.
    assert!(gup_sum_check(&ctx, "+", &zero, &zero).unwrap().is_member());
}

#[test]
fn finitely_many_exceptions_do_not_change_verdicts() {
    let ctx = two_adic_context();
    let f = DefinableSequence::geometric(1, 2, 0).with_exception(3, nat(1)).with_exception(5, nat(7));
    assert!(membership_check(&ctx, &f).unwrap().is_not_member());
    let g = DefinableSequence::constant(nat(1)).with_exception(2, nat(64));
    assert!(membership_check(&ctx, &g).unwrap().is_member());
}

#[test]
fn periodic_sets_are_undecided() {
    let ctx = two_adic_context();
    // n -> 2n + 1 ... is odd everywhere; n -> n is even half the time.
    assert!(membership_check(&ctx, &DefinableSequence::affine(2, 1)).unwrap().is_member());
    let v = membership_check(&ctx, &DefinableSequence::affine(1, 0)).unwrap();
    assert!(matches!(v, MembershipVerdict::Undecided { .. }), "{v:?}");
}

#[test]
fn u_equality_over_the_naturals() {
    let ctx = two_adic_context();
    let f = DefinableSequence::affine(0, 3);
    let g = DefinableSequence::constant(nat(3)).with_exception(0, nat(9));
    assert_eq!(u_equal(&ctx, &f, &g).unwrap(), Largeness::Large);
    let h = DefinableSequence::affine(1, 3);
    assert_eq!(u_equal(&ctx, &f, &h).unwrap(), Largeness::Small);
}

fn tail_context() -> GammaContext {
    let group = TorsionGroup::new(vec![
        Summand::Tail {
            p: 2,
            h: Affine { a: 1, b: 1 },
        },
        Summand::Cyclic {
            p: 3,
            k: 1,
            mult: Multiplicity::Omega,
        },
    ])
    .unwrap();
    GammaContext::new(
        Family::ConstantPower(StructureHandle::Torsion(group)),
        UltrafilterDescriptor::Frechet,
        vec![UnaryTypePresentation::tor(8)],
    )
    .unwrap()
}

fn member(witness: usize) -> MembershipVerdict {
    MembershipVerdict::Member {
        witness: ChoiceFunction(vec![witness]),
        large_set: SatSet::cofinite([]),
    }
}

#[test]
fn torsion_unit_tails() {
    let ctx = tail_context();
    // 2^{h(n)-1} in Z_{2^{h(n)}}: order 2, witness 2*x = 0.
    let f = DefinableSequence::tail_unit(0, Affine { a: 0, b: 1 }, 1);
    assert_eq!(membership_check(&ctx, &f).unwrap(), member(1));
    // The generator of Z_{2^{h(n)}} has unbounded order.
    let g = DefinableSequence::tail_unit(0, Affine { a: 1, b: 1 }, 1);
    let v = membership_check(&ctx, &g).unwrap();
    assert!(v.is_not_member(), "{v:?}");
    // Order 4: the closed forms merge to 3 * 2^{h(n)-2}.
    let k = DefinableSequence::tail_unit(0, Affine { a: 0, b: 2 }, 1);
    assert_eq!(gup_sum_check(&ctx, "+", &f, &k).unwrap(), member(3));
    // Across summands there is no closed form; the scheme g_+(2, 3) = 6 applies.
    let t = DefinableSequence::tail_unit(1, Affine { a: 0, b: 1 }, 1);
    assert_eq!(membership_check(&ctx, &t).unwrap(), member(2));
    assert_eq!(gup_sum_check(&ctx, "+", &f, &t).unwrap(), member(5));
    let z = DefinableSequence::constant(Value::Tor(TorsionElement::zero()));
    assert_eq!(gup_sum_check(&ctx, "+", &z, &z).unwrap(), member(0));
}

#[test]
fn torsion_u_equality() {
    let ctx = tail_context();
    let f = DefinableSequence::tail_unit(0, Affine { a: 0, b: 1 }, 1);
    let k = DefinableSequence::tail_unit(0, Affine { a: 0, b: 2 }, 2);
    let zero = Value::Tor(TorsionElement::zero());
    assert_eq!(u_equal(&ctx, &f, &f.clone().with_exception(0, zero)).unwrap(), Largeness::Large);
    // 2 * 2^{h-2} = 2^{h-1}.
    assert_eq!(u_equal(&ctx, &f, &k).unwrap(), Largeness::Large);
    let g = DefinableSequence::tail_unit(0, Affine { a: 1, b: 1 }, 1);
    assert_eq!(u_equal(&ctx, &f, &g).unwrap(), Largeness::Small);
}

fn z(n: u64) -> FiniteStructure {
    FiniteStructure::cyclic_group(n).unwrap()
}

#[test]
fn hull_of_a_relation_type_is_the_relation() {
    let m = StructureHandle::Finite(catalog::escape_structure());
    let h = gamma_hull(&m, &[catalog::not_r_type()]).unwrap();
    assert_eq!(h.elements, vec!["a"]);
    assert!(!h.is_closed());
    assert_eq!(h.closure[0].counterexample, Some(vec!["a".to_string()]));
}

#[test]
fn finite_groups_are_their_own_torsion_hull() {
    let h = gamma_hull(&StructureHandle::Finite(z(6)), &[UnaryTypePresentation::tor(6)]).unwrap();
    assert_eq!(h.indices, (0..6).collect::<Vec<_>>());
    assert!(h.is_closed());
    let g = StructureHandle::Torsion(TorsionGroup::finite(&[(2, 1), (3, 1)]).unwrap());
    let h = gamma_hull(&g, &[UnaryTypePresentation::tor(6)]).unwrap();
    assert_eq!(h.indices.len(), 6);
    // Depth 2 only certifies orders 1 and 2.
    let h = gamma_hull(&StructureHandle::Finite(z(6)), &[UnaryTypePresentation::tor(2)]).unwrap();
    assert_eq!(h.elements, vec!["0", "3"]);
}

#[test]
fn closure_scheme_for_torsion() {
    let tor = [UnaryTypePresentation::tor(6)];
    let ClosureCheck::WitnessScheme { rules, .. } =
        check_gamma_closed(&ClosureSubject::Theory(TheoryTag::Torsion), &tor, 6).unwrap()
    else {
        panic!()
    };
    assert!(rules.contains(&"g_+(n, m) = n*m".to_string()));
    let family = [z(6)];
    let ClosureCheck::WitnessScheme { entries, .. } =
        check_gamma_closed(&ClosureSubject::Family(&family), &tor, 6).unwrap()
    else {
        panic!()
    };
    // Every tabulated witness for + divides the product of the inputs' orders.
    for e in entries.iter().filter(|e| e.symbol == "+") {
        let (n, m) = (e.inputs[0].0[0] + 1, e.inputs[1].0[0] + 1);
        let out = e.output.0[0] + 1;
        assert_eq!((n * m) % out, 0, "{e:?}");
    }
    assert_eq!(entries.iter().filter(|e| e.symbol == "+").count(), 36);
}

#[test]
fn closure_counterexample_and_vacuous_scheme() {
    let family = [catalog::escape_structure()];
    let r = check_gamma_closed(&ClosureSubject::Family(&family), &[catalog::not_r_type()], 4).unwrap();
    let ClosureCheck::CounterExample { symbol, tuple, value, .. } = r else { panic!("{r:?}") };
    assert_eq!((symbol.as_str(), tuple, value.as_str()), ("F", vec!["a".to_string()], "b"));
    let r = check_gamma_closed(&ClosureSubject::Family(&[z(2)]), &[], 4).unwrap();
    assert!(r.is_scheme());
}

#[test]
fn niceness_checks() {
    let tor = [UnaryTypePresentation::tor(6)];
    let family = [z(6)];
    let psi = parse_formula("exists y. y + y = x", &family[0].signature).unwrap();
    assert!(check_gamma_nice(&family, &tor, std::slice::from_ref(&psi), 6).unwrap().is_scheme());
    let esc = [catalog::escape_structure()];
    let phi = parse_formula("exists y. F(x) = y", &esc[0].signature).unwrap();
    let r = check_gamma_nice(&esc, &[catalog::not_r_type()], &[phi], 4).unwrap();
    assert!(r.is_counterexample(), "{r:?}");
    assert!(check_gamma_nice(&family, &[], &[psi], 4).unwrap().is_scheme());
}

fn z6_context() -> GammaContext {
    let m = StructureHandle::Finite(z(6));
    GammaContext::allowing_realizations(
        Family::Finite(vec![m.clone(), m.clone(), m]),
        UltrafilterDescriptor::Principal { size: 3, atom: 0 },
        vec![UnaryTypePresentation::tor(6)],
    )
    .unwrap()
}

#[test]
fn los_on_copies_of_z6() {
    let ctx = z6_context();
    let sig = z(6).signature;
    let formulas: Vec<_> = ["forall y. x + y = y + x", "forall y. (y + y = 0 -> y = 0 | y = x)", "x + x = 0", "~(x = 1)"]
        .iter()
        .map(|t| parse_formula(t, &sig).unwrap())
        .collect();
    let r = verify_los_finite(&ctx, &formulas, Sampling::default()).unwrap();
    assert!(r.collapse.holds(), "{:?}", r.collapse);
    assert_eq!(r.collapse.hull_size, 6);
    for f in &r.formulas {
        assert!(f.skipped.is_none());
        assert_eq!((f.lr_failures, f.rl_failures), (0, 0), "{f:?}");
        assert!(f.samples > 0);
    }
    assert_eq!(r.tally(crate::formula::QuantClass::Universal).both, 2);
}

#[test]
fn surrogate_existential_fails_to_transfer() {
    let ctx = catalog::surrogate_context(2).unwrap();
    let sig = catalog::surrogate_structure().signature;
    let psi = parse_formula(catalog::SURROGATE_FORMULA, &sig).unwrap();
    let forall = parse_formula("forall y. (N2(y) -> ~(mul12(one, y) = x) | N1(x))", &sig).unwrap();
    let r = verify_los_finite(&ctx, &[psi, forall], Sampling::default()).unwrap();
    assert!(r.hull.is_closed());
    assert_eq!(r.hull.indices.len(), catalog::SURROGATE_SORT_SIZE + catalog::SURROGATE_DEPTH);
    assert!(r.collapse.holds(), "{:?}", r.collapse);
    let ex = &r.formulas[0];
    // True of a5 in the structure, false in the hull: no standard y = b5.
    assert!(ex.lr_failures > 0, "{ex:?}");
    assert_eq!(ex.rl_failures, 0);
    assert_eq!((r.formulas[1].lr_failures, r.formulas[1].class), (0, crate::formula::QuantClass::Universal));
}

#[test]
fn non_closed_hulls_restrict_to_relations() {
    let m = StructureHandle::Finite(catalog::escape_structure());
    let ctx = GammaContext::allowing_realizations(
        Family::Finite(vec![m]),
        UltrafilterDescriptor::Principal { size: 1, atom: 0 },
        vec![catalog::not_r_type()],
    )
    .unwrap();
    let sig = catalog::escape_structure().signature;
    let fs = [parse_formula("F(x) = x", &sig).unwrap(), parse_formula("forall y. R(y)", &sig).unwrap()];
    let r = verify_los_finite(&ctx, &fs, Sampling::default()).unwrap();
    assert!(r.formulas[0].skipped.is_some());
    // forall y. R(y) is false in M but true in the hull {a}: the sentence
    // goes down only in the universal direction.
    assert_eq!((r.formulas[1].lr_failures, r.formulas[1].rl_failures), (0, 1));
}

#[test]
fn naturals_ultrapower_collapses_for_boundedness() {
    let ctx = catalog::boundedness_context(8);
    let v = ultrapower_collapse_check(&ctx).unwrap();
    assert!(v.collapses(), "{v:?}");
    let m = StructureHandle::Naturals(crate::structures::NatModel);
    assert!(proper_extension_criterion(&m, &ctx.gamma).unwrap().is_no());
}

#[test]
fn two_adic_ultrapower_is_proper() {
    let ctx = catalog::two_adic_context(8);
    let v = ultrapower_collapse_check(&ctx).unwrap();
    let CollapseVerdict::ProperExtension { sequence, witness, .. } = v else { panic!("{v:?}") };
    assert_eq!(witness, ChoiceFunction(vec![0]));
    assert_eq!(u_equal(&ctx, &sequence, &DefinableSequence::constant(nat(1))).unwrap(), Largeness::Small);
    let m = StructureHandle::Naturals(crate::structures::NatModel);
    assert!(proper_extension_criterion(&m, &ctx.gamma).unwrap().is_yes());
}

#[test]
fn torsion_extension_criterion() {
    let tor = [UnaryTypePresentation::tor(8)];
    let yes = [catalog::tail_sum(2), catalog::omega_copies(2, 1), catalog::cyclic_sum_encoding()];
    for g in yes {
        let v = proper_extension_criterion(&StructureHandle::Torsion(g.clone()), &tor).unwrap();
        let ExtensionVerdict::Yes { bound, witness, .. } = v else { panic!("{v:?}") };
        assert_eq!((bound, witness), (Some(2), ChoiceFunction(vec![1])));
        let ctx = GammaContext::new(Family::ConstantPower(StructureHandle::Torsion(g)), UltrafilterDescriptor::Frechet, tor.to_vec()).unwrap();
        let c = ultrapower_collapse_check(&ctx).unwrap();
        assert!(matches!(c, CollapseVerdict::ProperExtension { .. }), "{c:?}");
    }
    for g in [catalog::prufer(2), catalog::rationals_mod_integers(), TorsionGroup::finite(&[(2, 2)]).unwrap()] {
        let v = proper_extension_criterion(&StructureHandle::Torsion(g.clone()), &tor).unwrap();
        assert!(v.is_no(), "{v:?}");
        let ctx = GammaContext::new(Family::ConstantPower(StructureHandle::Torsion(g)), UltrafilterDescriptor::Frechet, tor.to_vec()).unwrap();
        assert!(ultrapower_collapse_check(&ctx).unwrap().collapses());
    }
    let f = StructureHandle::Finite(z(4));
    assert!(proper_extension_criterion(&f, &tor).unwrap().is_no());
}
