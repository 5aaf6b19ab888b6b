//! Source text to core AST: lexing, parsing, desugaring, naming, printing.

mod ast;
mod desugar;
pub mod lexer;
mod parser;
pub(crate) mod pretty;
mod surface;

use std::fmt;
use std::sync::Arc;

pub(crate) use ast::fun_index;
pub use ast::{alpha_eq, annotate_names, free_vars, Expr, ExprKind, FunDef, Name, NodeId, Tau};
pub use desugar::{desugar, DesugarMode, Desugared};
pub use parser::{parse, parse_literal};
pub(crate) use parser::parse_nvalue;
pub use pretty::pretty_print;
pub use surface::{BinOp, Def, SourceProgram, SurfExpr, SurfKind};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub file: Arc<str>,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(file: Arc<str>, line: u32, col: u32) -> Self {
        Span { file, line, col }
    }

    /// Span for nodes synthesised outside any source file.
    pub fn synthetic() -> Self {
        Span::new(Arc::from("<builtin>"), 0, 0)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    Lex,
    Parse,
    Desugar,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {} error: {message}", match .kind {
    SyntaxErrorKind::Lex => "lex",
    SyntaxErrorKind::Parse => "parse",
    SyntaxErrorKind::Desugar => "syntax",
})]
pub struct SyntaxError {
    pub kind: SyntaxErrorKind,
    pub span: Span,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn lex(span: Span, message: impl Into<String>) -> Self {
        SyntaxError { kind: SyntaxErrorKind::Lex, span, message: message.into() }
    }

    pub(crate) fn parse(span: Span, message: impl Into<String>) -> Self {
        SyntaxError { kind: SyntaxErrorKind::Parse, span, message: message.into() }
    }

    pub(crate) fn desugar(span: Span, message: impl Into<String>) -> Self {
        SyntaxError { kind: SyntaxErrorKind::Desugar, span, message: message.into() }
    }
}
