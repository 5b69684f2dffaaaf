//! Ready-made structures, types and contexts for the worked examples.

use crate::formula::{parse_formula, Formula, Signature, UnaryTypePresentation};
use crate::structures::{Affine, FiniteStructure, Multiplicity, NatModel, StructureHandle, Summand, TorsionGroup};
use crate::ultraproduct::{DefinableSequence, Family, GammaContext, UltrafilterDescriptor, UltraError};

fn parse(text: &str, sig: &Signature) -> Formula {
    parse_formula(text, sig).expect("catalog formulas parse")
}

/// `{a, b}` with `R = {a}` and `F(a) = F(b) = b`: the hull for `{~R(x)}` is
/// `{a}`, which `F` leaves.
pub fn escape_structure() -> FiniteStructure {
    let sig = Signature::new("escape", vec![("F".into(), 1)], vec![("R".into(), 1)], None).expect("valid signature");
    FiniteStructure::from_fn(sig, vec!["a".into(), "b".into()], |_, _| 1, |_, args| args[0] == 0)
        .expect("valid structure")
}

/// The single-formula type `{~R(x)}`.
pub fn not_r_type() -> UnaryTypePresentation {
    let sig = escape_structure().signature;
    UnaryTypePresentation::listed("p", "x", vec![parse("~R(x)", &sig)]).expect("valid type")
}

/// `p = {(2^k | x) & x != 0 : 1 <= k <= depth}` over the naturals.
pub fn two_adic_type(depth: usize) -> UnaryTypePresentation {
    let sig = Signature::naturals();
    let formulas = (1..=depth)
        .map(|k| parse(&format!("(2^{k} | x) & ~(x = 0)"), &sig))
        .collect();
    UnaryTypePresentation::listed("p", "x", formulas).expect("valid type")
}

/// The ultrapower of the naturals over the Frechet filter omitting the
/// 2-adic type.
pub fn two_adic_context(depth: usize) -> GammaContext {
    GammaContext::new(
        Family::ConstantPower(StructureHandle::Naturals(NatModel)),
        UltrafilterDescriptor::Frechet,
        vec![two_adic_type(depth)],
    )
    .expect("valid context")
}

/// `p = {n < x : n < depth}`: the type of an element above every numeral.
pub fn boundedness_type(depth: usize) -> UnaryTypePresentation {
    let sig = Signature::naturals();
    let formulas = (0..depth).map(|n| parse(&format!("lt({n}, x)"), &sig)).collect();
    UnaryTypePresentation::listed("p", "x", formulas).expect("valid type")
}

pub fn boundedness_context(depth: usize) -> GammaContext {
    GammaContext::new(
        Family::ConstantPower(StructureHandle::Naturals(NatModel)),
        UltrafilterDescriptor::Frechet,
        vec![boundedness_type(depth)],
    )
    .expect("valid context")
}

/// Size of each sort in the two-sorted surrogate.
pub const SURROGATE_SORT_SIZE: usize = 16;
/// Number of standard second-sort values named by the surrogate's type.
pub const SURROGATE_DEPTH: usize = 4;

/// A finite surrogate of two disjoint copies of the naturals: first-sort
/// values `a0..a15`, second-sort values `b0..b15`, unary sort predicates
/// `N1`, `N2`, predicates `E0..E3` naming `b0..b3`, the constant `one = a1`,
/// and `mul12(u, v)` the first-sort value of the (capped) product.
pub fn surrogate_structure() -> FiniteStructure {
    let n = SURROGATE_SORT_SIZE;
    let mut relations = vec![("N1".to_string(), 1), ("N2".to_string(), 1)];
    relations.extend((0..SURROGATE_DEPTH).map(|k| (format!("E{k}"), 1)));
    let sig = Signature::new(
        "two-sorted surrogate",
        vec![("mul12".into(), 2), ("one".into(), 0)],
        relations,
        None,
    )
    .expect("valid signature");
    let universe = (0..n).map(|v| format!("a{v}")).chain((0..n).map(|v| format!("b{v}"))).collect();
    let value = |e: usize| e % n;
    FiniteStructure::from_fn(
        sig,
        universe,
        |f, args| match f {
            "one" => 1,
            _ => (value(args[0]) * value(args[1])).min(n - 1),
        },
        |r, args| {
            let e = args[0];
            match r {
                "N1" => e < n,
                "N2" => e >= n,
                _ => {
                    let k: usize = r[1..].parse().expect("E<k>");
                    e == n + k
                }
            }
        },
    )
    .expect("valid structure")
}

/// `p = {N2(x) & ~E_k(x) : k < 4}`: a second-sort element other than the
/// named standard values.
pub fn surrogate_type() -> UnaryTypePresentation {
    let sig = surrogate_structure().signature;
    let formulas = (0..SURROGATE_DEPTH).map(|k| parse(&format!("N2(x) & ~E{k}(x)"), &sig)).collect();
    UnaryTypePresentation::listed("p", "x", formulas).expect("valid type")
}

/// `psi(x)`: `x` is the first-sort image of a second-sort value.
pub const SURROGATE_FORMULA: &str = "exists y. (N2(y) & mul12(one, y) = x)";

/// Copies of the surrogate under the principal ultrafilter at 0. Members
/// realize the truncated type (the hull is a proper subset).
pub fn surrogate_context(copies: usize) -> Result<GammaContext, UltraError> {
    let m = StructureHandle::Finite(surrogate_structure());
    GammaContext::allowing_realizations(
        Family::Finite(vec![m; copies]),
        UltrafilterDescriptor::Principal { size: copies, atom: 0 },
        vec![surrogate_type()],
    )
}

/// `Z_{p^{h(n)}}` for `h(n) = n + 1`: the summand list of `(+)_{n >= 1} Z_{p^n}`.
pub fn tail_sum(p: u64) -> TorsionGroup {
    TorsionGroup::new(vec![Summand::Tail {
        p,
        h: Affine { a: 1, b: 1 },
    }])
    .expect("valid group")
}

/// `Z_{p^k}` with multiplicity omega.
pub fn omega_copies(p: u64, k: u32) -> TorsionGroup {
    TorsionGroup::new(vec![Summand::Cyclic {
        p,
        k,
        mult: Multiplicity::Omega,
    }])
    .expect("valid group")
}

/// Primes used by the finite encodings of `(+)_n Z_n` and `Q/Z`.
pub const ENCODING_PRIMES: [u64; 4] = [2, 3, 5, 7];

/// `(+)_{n < omega} Z_n`, encoded by one tail `(+)_{k >= 1} Z_{p^k}` per
/// prime of [`ENCODING_PRIMES`].
pub fn cyclic_sum_encoding() -> TorsionGroup {
    TorsionGroup::new(
        ENCODING_PRIMES
            .iter()
            .map(|&p| Summand::Tail {
                p,
                h: Affine { a: 1, b: 1 },
            })
            .collect(),
    )
    .expect("valid group")
}

/// The Prufer group `Z(p^infinity)`.
pub fn prufer(p: u64) -> TorsionGroup {
    TorsionGroup::new(vec![Summand::Prufer {
        p,
        mult: Multiplicity::Finite(1),
    }])
    .expect("valid group")
}

/// `Q/Z` restricted to [`ENCODING_PRIMES`]: one Prufer summand per prime.
pub fn rationals_mod_integers() -> TorsionGroup {
    TorsionGroup::new(
        ENCODING_PRIMES
            .iter()
            .map(|&p| Summand::Prufer {
                p,
                mult: Multiplicity::Finite(1),
            })
            .collect(),
    )
    .expect("valid group")
}

/// The family `M_n = Z_{2^{n+1}}` under the Frechet filter with `Γ = {tor}`.
pub fn two_power_family(depth: usize) -> GammaContext {
    GammaContext::new(
        Family::tail_power(2, Affine { a: 1, b: 1 }).expect("valid family"),
        UltrafilterDescriptor::Frechet,
        vec![UnaryTypePresentation::tor(depth)],
    )
    .expect("valid context")
}

/// `n -> 2^{h(n)-1}` in component `n` of summand 0: an element of order 2
/// in every component.
pub fn order_two_sequence() -> DefinableSequence {
    DefinableSequence::tail_unit(0, Affine { a: 0, b: 1 }, 1)
}

/// `n -> 1` in component `n` of summand 0: a generator of every component.
pub fn generator_sequence() -> DefinableSequence {
    DefinableSequence::tail_unit(0, Affine { a: 1, b: 1 }, 1)
}
