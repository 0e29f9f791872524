//! Restriction expression language: parsing, evaluation against projected
//! state, and dependency extraction for the subscription index.

mod ast;
mod eval;
mod parser;
mod value;

pub use ast::{BinaryOp, EditAction, Expr, Subject, UnaryOp};
pub use eval::{dependencies, eval, EvalContext, EvalError, Slot, StateView, MEMBERSHIP};
pub use parser::{parse_action, parse_expr, SyntaxError};
pub(crate) use value::parse_number;
pub use value::Value;
