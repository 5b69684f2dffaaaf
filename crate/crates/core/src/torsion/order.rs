//! Orders of terms from orders of their arguments.

use std::ops::Mul;

use num_bigint::BigUint;
use num_traits::One;

use super::TorsionError;
use crate::formula::Term;

/// `f_tau` over any commutative ring of orders: variables take their given
/// orders, scalar multiples and negation keep the order, and a sum takes the
/// product of the orders of its summands.
pub fn propagate<R>(tau: &Term, order_of: &impl Fn(&str) -> Option<R>) -> Result<R, TorsionError>
where
    R: Clone + One + Mul<Output = R>,
{
    match tau {
        Term::Var(v) => order_of(v).ok_or_else(|| TorsionError::Term(format!("no order for `{v}`"))),
        Term::Scalar(_, t) => propagate(t, order_of),
        Term::App(f, args) => match (f.as_str(), args.as_slice()) {
            ("+", [a, b]) => Ok(propagate(a, order_of)? * propagate(b, order_of)?),
            ("-", [a]) => propagate(a, order_of),
            ("0", []) => Ok(R::one()),
            _ => Err(TorsionError::Term(format!(
                "`{f}` with {} argument(s) is not a module operation",
                args.len()
            ))),
        },
    }
}

/// `f_tau(orders)` for a term in the variables `x0, x1, ...`, where `xi`
/// has order `orders[i]`.
pub fn order_propagation(tau: &Term, orders: &[BigUint]) -> Result<BigUint, TorsionError> {
    if orders.iter().any(|r| r == &BigUint::ZERO) {
        return Err(TorsionError::Term("orders must be positive".into()));
    }
    propagate(tau, &|v: &str| {
        v.strip_prefix('x')
            .and_then(|i| i.parse::<usize>().ok())
            .and_then(|i| orders.get(i).cloned())
    })
}
