use std::fmt;

use num_traits::Signed;

use super::ast::{Atom, Formula, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(s, args) if s == "+" && args.len() == 2 => {
                write!(f, "({} + {})", args[0], args[1])
            }
            Term::App(s, args) if s == "-" && args.len() == 1 => match &args[0] {
                // `-k*t` would re-parse as a negative scalar; `+` always prints parenthesized.
                inner @ Term::Scalar(..) => write!(f, "-({inner})"),
                inner => write!(f, "-{inner}"),
            },
            Term::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Term::Scalar(k, t) => {
                if k.is_negative() {
                    write!(f, "-{}*{t}", -k)
                } else {
                    write!(f, "{k}*{t}")
                }
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(a, b) => write!(f, "{a} = {b}"),
            Atom::Rel(r, args) => {
                write!(f, "{r}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Atom::Divides { prime, exp, term } => write!(f, "{prime}^{exp} | {term}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => match **x {
                Formula::Atom(_) => write!(f, "~({x})"),
                _ => write!(f, "~{x}"),
            },
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Forall(v, x) => write!(f, "(forall {v}. {x})"),
            Formula::Exists(v, x) => write!(f, "(exists {v}. {x})"),
        }
    }
}

/// Canonical text of a formula; re-parses to the same tree.
pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}
