//! CAS+ front end: tokenizer, parser, name resolution and pretty printer.

use std::fmt;

mod ast;
mod error;
mod lexer;
mod parser;
mod pretty;
mod resolve;

pub use ast::{
    DeclKind, Declaration, Goal, Ident, IdentRole, KnowledgeEntry, Message, ProtocolSpec,
    SessionBinding, SessionInstance, Term,
};
pub use error::{ParseError, SemanticError, SemanticErrors, Warning};
pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use parser::{parse, parse_bytes, parse_source, MAX_NESTING};
pub use pretty::{pretty_print, write_term};
pub use resolve::{resolve, ResolvedSpec};

/// 1-based line and column of a lexeme, with its length in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        SourceSpan {
            line,
            column,
            length,
        }
    }
}

impl Default for SourceSpan {
    fn default() -> Self {
        SourceSpan::new(1, 1, 0)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
