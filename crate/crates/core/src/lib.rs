//! Gamma-ultraproducts of structures omitting unary types.
//!
//! Finite families are handled by brute force; ultrapowers over omega are
//! handled symbolically through closed-form sequences and the Frechet filter;
//! torsion abelian groups come with p.p. evaluation, invariants and the
//! tor-ultraproduct.

pub mod arith;
pub mod formula;
pub mod structures;
pub mod ultraproduct;
pub mod catalog;
pub mod torsion;
pub mod io;
