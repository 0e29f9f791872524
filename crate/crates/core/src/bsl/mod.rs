//! The colon-indented model language: lexing, parsing, canonical printing
//! and validation against a [`Catalog`].

mod ast;
mod catalog;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use catalog::{Catalog, EventDef, IndividualDef, ModelDef, PropertyDef};
pub use lexer::{lex, LexError, Line, SourceBlock};
pub use parser::{parse, parse_source, ParseError};
pub use printer::print;
pub use validate::{validate, Issue, RefKind, ValidatedBlock, ValidationError};
