//! Invariants conditions `Inv(phi, psi) >= k` / `< k` and their first-order shapes.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Formula, Term};
use super::pp::{recognize_pp, LinComb, PPCond, UnaryCond, UnaryPP};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvCondition {
    pub phi: UnaryPP,
    pub psi: UnaryPP,
    pub k: u64,
    /// `true` for `Inv >= k`, `false` for `Inv < k`.
    pub at_least: bool,
}

impl fmt::Display for InvCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.at_least { ">=" } else { "<" };
        write!(f, "Inv({}, {}) {op} {}", self.phi, self.psi, self.k)
    }
}

fn var(i: u64) -> String {
    format!("v{i}")
}

fn diff(j: u64, i: u64) -> Term {
    Term::add(Term::var(&var(j)), Term::neg(Term::var(&var(i))))
}

impl InvCondition {
    pub fn at_least(phi: UnaryPP, psi: UnaryPP, k: u64) -> Self {
        InvCondition { phi, psi, k, at_least: true }
    }

    pub fn less_than(phi: UnaryPP, psi: UnaryPP, k: u64) -> Self {
        InvCondition { phi, psi, k, at_least: false }
    }

    pub fn negate(&self) -> Self {
        InvCondition {
            at_least: !self.at_least,
            ..self.clone()
        }
    }

    /// The defining sentence:
    /// `exists v0..v{k-1}. /\ phi(vi) /\ /\_{j<i} ~psi(vj - vi)` for `>= k`,
    /// and the dual universal sentence for `< k`.
    pub fn to_formula(&self) -> Formula {
        let k = self.k.max(1);
        let vars: Vec<String> = (0..k).map(var).collect();
        let matrix = if self.at_least {
            let mut parts: Vec<Formula> = vars.iter().map(|v| self.phi.to_formula(v)).collect();
            for i in 0..k {
                for j in 0..i {
                    parts.push(Formula::not(self.psi.apply(&diff(j, i))));
                }
            }
            Formula::conj(parts).unwrap()
        } else {
            let mut parts: Vec<Formula> = vars.iter().map(|v| Formula::not(self.phi.to_formula(v))).collect();
            for i in 0..k {
                for j in 0..i {
                    parts.push(self.psi.apply(&diff(j, i)));
                }
            }
            Formula::disj(parts).unwrap()
        };
        vars.iter().rev().fold(matrix, |acc, v| {
            if self.at_least {
                Formula::exists(v, acc)
            } else {
                Formula::forall(v, acc)
            }
        })
    }

    /// Recognize the sentence shapes produced by [`InvCondition::to_formula`]
    /// (up to variable names and the order of conjuncts/disjuncts), for `k >= 2`.
    pub fn from_formula(f: &Formula) -> Option<InvCondition> {
        if !f.free_vars().is_empty() {
            return None;
        }
        let at_least = matches!(f, Formula::Exists(..));
        let mut vars = Vec::new();
        let mut cur = f;
        while let (Formula::Exists(v, b), true) | (Formula::Forall(v, b), false) = (cur, at_least) {
            vars.push(v.clone());
            cur = b;
        }
        let k = vars.len();
        if k < 2 || vars.iter().collect::<std::collections::BTreeSet<_>>().len() != k {
            return None;
        }
        let mut items = Vec::new();
        flatten(cur, at_least, &mut items);
        let mut phi_parts: Vec<Vec<UnaryCond>> = vec![Vec::new(); k];
        let mut trivial_phi = 0usize;
        let mut psi_pairs: Vec<Option<Vec<UnaryCond>>> = vec![None; k * k];
        let mut wildcard_psi: Vec<Vec<UnaryCond>> = Vec::new();
        for item in items {
            // In the `>= k` shape phi occurs positively and psi negated; dually for `< k`.
            let (negated, inner) = match item {
                Formula::Not(x) => (true, &**x),
                x => (false, x),
            };
            let is_phi = negated != at_least;
            let pp = recognize_pp(inner).ok()?;
            let used: Vec<usize> = pp
                .vars()
                .iter()
                .map(|v| vars.iter().position(|w| w == v))
                .collect::<Option<Vec<_>>>()?;
            if is_phi {
                match used.as_slice() {
                    [] => trivial_phi += 1,
                    [i] => phi_parts[*i].extend(unary_conds(&pp.conds, &vars[*i])?),
                    _ => return None,
                }
            } else {
                match used.as_slice() {
                    [] => wildcard_psi.push(unary_conds(&pp.conds, "")?),
                    [a, b] => {
                        let (j, i) = ((*a).min(*b), (*a).max(*b));
                        let conds = pair_conds(&pp.conds, &vars[j], &vars[i])?;
                        let slot = &mut psi_pairs[j * k + i];
                        match slot {
                            Some(existing) => existing.extend(conds),
                            None => *slot = Some(conds),
                        }
                    }
                    _ => return None,
                }
            }
        }
        let phi = UnaryPP::new(phi_parts[0].clone());
        if phi_parts.iter().any(|p| UnaryPP::new(p.clone()) != phi) {
            return None;
        }
        if phi.conds.is_empty() && trivial_phi == 0 {
            return None;
        }
        let mut psi: Option<UnaryPP> = None;
        let mut filled = 0usize;
        for i in 0..k {
            for j in 0..i {
                if let Some(c) = &psi_pairs[j * k + i] {
                    let u = UnaryPP::new(c.clone());
                    if psi.as_ref().is_some_and(|p| *p != u) {
                        return None;
                    }
                    psi = Some(u);
                    filled += 1;
                }
            }
        }
        let psi = match psi {
            Some(p) if filled == k * (k - 1) / 2 && wildcard_psi.is_empty() => p,
            None if wildcard_psi.len() == k * (k - 1) / 2 => UnaryPP::new(wildcard_psi[0].clone()),
            _ => return None,
        };
        Some(InvCondition {
            phi,
            psi,
            k: k as u64,
            at_least,
        })
    }
}

fn flatten<'a>(f: &'a Formula, conj: bool, out: &mut Vec<&'a Formula>) {
    match (f, conj) {
        (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
            flatten(a, conj, out);
            flatten(b, conj, out);
        }
        _ => out.push(f),
    }
}

fn unary_conds(conds: &[PPCond], v: &str) -> Option<Vec<UnaryCond>> {
    conds
        .iter()
        .map(|c| match c {
            PPCond::Div { prime, exp, tau } if only(tau, &[v]) => Some(UnaryCond::Div {
                prime: *prime,
                exp: *exp,
                coeff: tau.coeff(v),
            }),
            PPCond::Ann { tau } if only(tau, &[v]) => Some(UnaryCond::Ann { coeff: tau.coeff(v) }),
            _ => None,
        })
        .collect()
}

/// Conditions on `vj - vi`: the coefficients of the two variables must be opposite.
fn pair_conds(conds: &[PPCond], vj: &str, vi: &str) -> Option<Vec<UnaryCond>> {
    conds
        .iter()
        .map(|c| {
            let tau = match c {
                PPCond::Div { tau, .. } | PPCond::Ann { tau } => tau,
            };
            if !only(tau, &[vj, vi]) || tau.coeff(vj) != -tau.coeff(vi) {
                return None;
            }
            let coeff: BigInt = tau.coeff(vj).abs();
            Some(match c {
                PPCond::Div { prime, exp, .. } => UnaryCond::Div {
                    prime: *prime,
                    exp: *exp,
                    coeff,
                },
                PPCond::Ann { .. } => UnaryCond::Ann { coeff },
            })
        })
        .collect()
}

fn only(tau: &LinComb, allowed: &[&str]) -> bool {
    tau.0.iter().all(|(v, c)| c.is_zero() || allowed.contains(&v.as_str()))
}
