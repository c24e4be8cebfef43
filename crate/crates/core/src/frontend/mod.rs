//! Lexing, parsing and printing of the Fortran subset and its annotations.

pub mod annotation;
pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

use crate::diag::Pos;

pub use annotation::{parse_annotation, resolve_aliases, AliasError};
pub use ast::SourceFile;
pub use parser::{parse_expr, parse_source};
pub use printer::print_source;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}:{}:{}: syntax error: {message}", pos.line, pos.col)]
pub struct SyntaxError {
    pub file: String,
    pub pos: Pos,
    pub message: String,
}
