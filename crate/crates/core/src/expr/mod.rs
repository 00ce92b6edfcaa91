//! Symbolic expressions: construction, printing, parsing, calculus and
//! canonical simplification.

mod diff;
mod eval;
mod node;
mod parse;
pub mod poly;
mod print;
mod ratfun;
mod subst;
mod symbol;
mod zero;

pub use diff::diff;
pub use eval::{eval, eval_terms, Point};
#[allow(unused_imports)]
pub(crate) use node::{frac, rat};
pub use node::{Expr, Kernel, Node, Rational};
pub use parse::parse;
pub use ratfun::{simplify, simplify_all, RatContext, RatFun};
pub use subst::{substitute, substitute_fixpoint, Rules};
pub use symbol::{jet_alias, Symbol, SymbolKind, SymbolTable};
pub use zero::{is_zero, Verdict, ZeroTest};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier '{name}' at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("cyclic substitution: {chain}")]
    CyclicSubstitution { chain: String },
    #[error("no value bound for '{name}'")]
    Unbound { name: String },
    #[error("domain error: {detail}")]
    Domain { detail: String },
    #[error("zero test indeterminate: every sample point was singular")]
    Indeterminate,
}
