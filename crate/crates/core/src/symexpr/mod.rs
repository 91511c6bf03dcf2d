//! Exact symbolic expressions over bond-graph coordinates and parameters.
//!
//! Expressions are kept in a canonical sum-of-monomials form with rational
//! coefficients, so structural equality is mathematical equality for the
//! polynomial-and-rational fragment the reducer produces.

mod calculus;
mod display;
mod eval;
mod expr;
mod parse;
mod split;
mod sym;

pub use calculus::{differentiate, evaluate_exact, substitute};
pub(crate) use calculus::substitute_unchecked;
pub use eval::{eval_with, evaluate, Binding, Compiled};
pub use expr::{integer, rational, Expr, Factor, Func, Monomial, Rational};
pub use parse::{parse_expr, parse_rational, SymbolTable};
pub use split::{equal_mod_scale, linear_split, LinearSplitter};
pub use sym::{Sym, SymKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("unknown function `{name}` at byte {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("{func} takes {expected} argument(s), got {found}")]
    Arity {
        func: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("substitution rules are cyclic through `{0}`")]
    CyclicSubstitution(Sym),
    #[error("no value bound for `{0}`")]
    Unbound(Sym),
    #[error("domain error: {0}")]
    Domain(String),
}
