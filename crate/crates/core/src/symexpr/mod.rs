//! Symbolic scalar expressions on the jet manifold.

mod atom;
mod calculus;
mod expr;
mod integrate;
mod numeric;
pub mod parse;
mod poly;
mod zero;

#[cfg(test)]
mod tests;

pub use atom::{Atom, AtomKind, Head, JetCoordinate, Sym};
pub use calculus::Substitution;
pub use expr::{Expr, ScalarExpr};
pub use integrate::antiderivative;
pub use numeric::NumericPoint;
pub use parse::{parse_expr, ExprContext, Span};
pub use poly::{rat, Monomial, Poly, Rat};
pub use zero::{is_zero, sample_point, AssumptionLedger, ZeroStatus};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("parse error at {span}: {msg}")]
    Parse { span: Span, msg: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclic substitution through `{0}`")]
    CyclicSubstitution(String),
    #[error("no value for `{0}`")]
    MissingValue(String),
    #[error("evaluation hit a pole")]
    Pole,
    #[error("argument outside the domain of `{0}`")]
    Domain(String),
    #[error("no closed-form antiderivative of `{expr}` in `{var}`")]
    Unintegrable { expr: String, var: String },
}
