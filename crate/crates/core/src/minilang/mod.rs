//! A small Python-like language: parser, structural-token extraction, a
//! step-limited interpreter and a template summarizer.
//!
//! The grammar is documented on [`parser`] and in `docs/minilang.ebnf`.

mod ast;
mod foreign;
mod interp;
mod lexer;
mod parser;
mod structural;
mod summary;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{
    BinOp, Expr, ExprKind, FunctionDef, Ident, NodeKind, Program, Span, Stmt, StmtKind, SyntaxNode,
};
pub use foreign::{foreign_marker, is_blank_source};
pub use interp::{
    interpret, run_with_tests, ExecBudget, ExecResult, ExecStatus, TestRun, ALLOWED_CAPABILITIES,
};
pub use parser::parse_program;
pub use structural::{extract_structural_tokens, structural_offsets, StructuralSpan};
pub use summary::summarize_ast;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseErrorKind {
    EmptySource,
    Syntax,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset of the offending token.
    pub offset: usize,
    pub expected: String,
    pub found: Option<String>,
}

impl ParseError {
    pub(crate) fn empty() -> Self {
        Self {
            kind: ParseErrorKind::EmptySource,
            offset: 0,
            expected: "at least one statement".into(),
            found: None,
        }
    }

    pub(crate) fn syntax(offset: usize, expected: impl Into<String>) -> Self {
        Self {
            kind: ParseErrorKind::Syntax,
            offset,
            expected: expected.into(),
            found: None,
        }
    }

    pub(crate) fn syntax_found(offset: usize, expected: impl Into<String>, found: String) -> Self {
        Self {
            found: Some(found),
            ..Self::syntax(offset, expected)
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ParseErrorKind::EmptySource => write!(f, "empty source"),
            ParseErrorKind::Syntax => {
                write!(f, "byte {}: expected {}", self.offset, self.expected)?;
                if let Some(found) = &self.found {
                    write!(f, ", found {found}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parse into the untyped [`SyntaxNode`] tree rooted at a `Module`.
pub fn parse(source: &str) -> Result<SyntaxNode, ParseError> {
    parse_program(source).map(|p| p.syntax_tree())
}
