//! Exact symbolic engine for normally ordering differential and
//! finite-difference operators.
//!
//! The crate covers five operator algebras over one coefficient ring
//! (Laurent polynomials in a formal `q` with exact rational coefficients):
//! the Weyl algebra, its Grassmann extension, the q-deformed line with the
//! Jackson derivative, the quantum plane, and the quantum hyperplane. On top
//! of the rewriting engine it provides:
//!
//! * constructors and closed normal forms for the raising-operator power
//!   identities of these algebras ([`identities`]),
//! * the action of operators on modules of polynomials of bounded degree,
//!   matrix representations, and annihilation/nilpotency checks ([`polyrep`]),
//! * a small expression language with a canonical printer ([`exprlang`]).

pub mod exprlang;
pub mod identities;
pub mod opalg;
pub mod polyrep;
pub mod scalar;

pub use opalg::{
    AlgebraContext, AlgebraError, Generator, NormalMonomial, OperatorExpr, RewriteStrategy,
    RuleSet, Word,
};
pub use scalar::{
    multinomial, n_hat, q_binomial, q_factorial, q_number, Rational, Scalar, ScalarError,
    ScalarQuotient,
};
