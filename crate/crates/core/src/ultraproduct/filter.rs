//! Ultrafilter descriptors and the index sets they are asked about.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of indices, as far as it could be determined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SatSet {
    /// Exactly these indices.
    Finite { members: BTreeSet<u64> },
    /// Every index except these.
    Cofinite { missing: BTreeSet<u64> },
    /// Infinite and coinfinite: below `start` membership is `prefix`; from
    /// `start` on it follows `pattern` with the given period.
    Periodic {
        start: u64,
        prefix: BTreeSet<u64>,
        pattern: Vec<bool>,
    },
    /// The decision procedure does not cover this case.
    Unknown { reason: String },
}

impl SatSet {
    pub fn finite(members: impl IntoIterator<Item = u64>) -> Self {
        SatSet::Finite {
            members: members.into_iter().collect(),
        }
    }

    pub fn cofinite(missing: impl IntoIterator<Item = u64>) -> Self {
        SatSet::Cofinite {
            missing: missing.into_iter().collect(),
        }
    }

    pub fn unknown(reason: impl Into<String>) -> Self {
        SatSet::Unknown { reason: reason.into() }
    }

    /// Build from explicit truth values below `start` and an eventual
    /// periodic pattern from `start` on.
    pub fn from_pattern(start: u64, below: impl Fn(u64) -> bool, pattern: Vec<bool>) -> Self {
        let prefix: BTreeSet<u64> = (0..start).filter(|&n| below(n)).collect();
        if pattern.iter().all(|&b| b) {
            SatSet::cofinite((0..start).filter(|n| !prefix.contains(n)))
        } else if pattern.iter().all(|&b| !b) {
            SatSet::Finite { members: prefix }
        } else {
            SatSet::Periodic { start, prefix, pattern }
        }
    }

    pub fn contains(&self, n: u64) -> Option<bool> {
        match self {
            SatSet::Finite { members } => Some(members.contains(&n)),
            SatSet::Cofinite { missing } => Some(!missing.contains(&n)),
            SatSet::Periodic { start, prefix, pattern } => Some(if n < *start {
                prefix.contains(&n)
            } else {
                pattern[((n - start) % pattern.len() as u64) as usize]
            }),
            SatSet::Unknown { .. } => None,
        }
    }

    /// Set intersection where the result stays in a representable class.
    pub fn intersect(&self, other: &SatSet) -> SatSet {
        use SatSet::*;
        match (self, other) {
            (Unknown { reason }, _) | (_, Unknown { reason }) => SatSet::unknown(reason.clone()),
            (Finite { members }, x) | (x, Finite { members }) => {
                SatSet::finite(members.iter().copied().filter(|&n| x.contains(n) == Some(true)))
            }
            (Cofinite { missing: a }, Cofinite { missing: b }) => SatSet::cofinite(a.union(b).copied()),
            (Cofinite { missing }, p @ Periodic { .. }) | (p @ Periodic { .. }, Cofinite { missing }) => {
                let Periodic { start, pattern, .. } = p else { unreachable!() };
                let bound = missing.iter().next_back().map_or(0, |m| m + 1).max(*start);
                let shift = ((bound - start) % pattern.len() as u64) as usize;
                let mut rotated = pattern.clone();
                rotated.rotate_left(shift);
                SatSet::from_pattern(bound, |n| p.contains(n) == Some(true) && !missing.contains(&n), rotated)
            }
            (Periodic { .. }, Periodic { .. }) => {
                let (a, b) = (self.periodic_parts(), other.periodic_parts());
                let start = a.0.max(b.0);
                let period = num_integer::lcm(a.1, b.1);
                let pattern = (start..start + period)
                    .map(|n| self.contains(n) == Some(true) && other.contains(n) == Some(true))
                    .collect();
                SatSet::from_pattern(
                    start,
                    |n| self.contains(n) == Some(true) && other.contains(n) == Some(true),
                    pattern,
                )
            }
        }
    }

    fn periodic_parts(&self) -> (u64, u64) {
        match self {
            SatSet::Periodic { start, pattern, .. } => (*start, pattern.len() as u64),
            _ => (0, 1),
        }
    }

    /// Complement, where representable.
    pub fn complement(&self) -> SatSet {
        match self {
            SatSet::Finite { members } => SatSet::Cofinite {
                missing: members.clone(),
            },
            SatSet::Cofinite { missing } => SatSet::Finite {
                members: missing.clone(),
            },
            SatSet::Periodic { start, prefix, pattern } => SatSet::Periodic {
                start: *start,
                prefix: (0..*start).filter(|n| !prefix.contains(n)).collect(),
                pattern: pattern.iter().map(|b| !b).collect(),
            },
            SatSet::Unknown { reason } => SatSet::unknown(reason.clone()),
        }
    }
}

impl fmt::Display for SatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &BTreeSet<u64>| s.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            SatSet::Finite { members } => write!(f, "{{{}}}", list(members)),
            SatSet::Cofinite { missing } if missing.is_empty() => write!(f, "all indices"),
            SatSet::Cofinite { missing } => write!(f, "all indices except {{{}}}", list(missing)),
            SatSet::Periodic { start, pattern, .. } => {
                write!(f, "periodic from {start} with period {}", pattern.len())
            }
            SatSet::Unknown { reason } => write!(f, "unknown ({reason})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Largeness {
    Large,
    Small,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UltrafilterDescriptor {
    /// The principal ultrafilter at `atom` on `{0, ..., size - 1}`.
    Principal { size: usize, atom: usize },
    /// Stand-in for a nonprincipal ultrafilter on omega: decides only
    /// finite and cofinite sets.
    Frechet,
}

impl UltrafilterDescriptor {
    pub fn decide(&self, s: &SatSet) -> Largeness {
        match self {
            UltrafilterDescriptor::Principal { atom, .. } => match s.contains(*atom as u64) {
                Some(true) => Largeness::Large,
                Some(false) => Largeness::Small,
                None => Largeness::Undecided,
            },
            UltrafilterDescriptor::Frechet => match s {
                SatSet::Finite { .. } => Largeness::Small,
                SatSet::Cofinite { .. } => Largeness::Large,
                SatSet::Periodic { .. } | SatSet::Unknown { .. } => Largeness::Undecided,
            },
        }
    }

    pub fn is_principal(&self) -> bool {
        matches!(self, UltrafilterDescriptor::Principal { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frechet_answers_only_finite_and_cofinite() {
        let u = UltrafilterDescriptor::Frechet;
        assert_eq!(u.decide(&SatSet::finite([1, 2])), Largeness::Small);
        assert_eq!(u.decide(&SatSet::cofinite([0])), Largeness::Large);
        let evens = SatSet::from_pattern(0, |_| false, vec![true, false]);
        assert_eq!(u.decide(&evens), Largeness::Undecided);
        assert_eq!(u.decide(&SatSet::unknown("x")), Largeness::Undecided);
    }

    #[test]
    fn principal_checks_the_atom() {
        let u = UltrafilterDescriptor::Principal { size: 3, atom: 1 };
        assert_eq!(u.decide(&SatSet::finite([1])), Largeness::Large);
        assert_eq!(u.decide(&SatSet::finite([0, 2])), Largeness::Small);
    }

    #[test]
    fn intersections_stay_exact() {
        let evens = SatSet::from_pattern(0, |_| false, vec![true, false]);
        let thirds = SatSet::from_pattern(0, |_| false, vec![true, false, false]);
        let both = evens.intersect(&thirds);
        for n in 0..40 {
            assert_eq!(both.contains(n), Some(n % 6 == 0));
        }
        let co = SatSet::cofinite([0, 3]);
        let x = co.intersect(&evens);
        for n in 0..40 {
            assert_eq!(x.contains(n), Some(n % 2 == 0 && n != 0));
        }
        assert_eq!(SatSet::cofinite([1]).intersect(&SatSet::cofinite([2])), SatSet::cofinite([1, 2]));
        assert_eq!(evens.complement().contains(3), Some(true));
    }
}
