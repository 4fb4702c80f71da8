//! A small arithmetic language in `x` and `t` for coefficient fields and data.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | sqrt | abs
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod ast;
mod lexer;
mod parser;

pub use ast::{BinOp, EvalError, ExprAst, Func, Var};
pub use lexer::{tokenize, Token, TokenKind, MAX_SOURCE_LEN};
pub use parser::{parse, parse_tokens, MAX_DEPTH};

/// Byte range `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("lex error at {span}: {message}")]
    Lex { message: String, span: SourceSpan },
    #[error("parse error at {span}: {message}")]
    Parse { message: String, span: SourceSpan },
}

impl ExprError {
    pub(crate) fn lex(message: impl Into<String>, span: SourceSpan) -> Self {
        ExprError::Lex {
            message: message.into(),
            span,
        }
    }

    pub(crate) fn parse(message: impl Into<String>, span: SourceSpan) -> Self {
        ExprError::Parse {
            message: message.into(),
            span,
        }
    }

    pub fn span(&self) -> SourceSpan {
        match self {
            ExprError::Lex { span, .. } | ExprError::Parse { span, .. } => *span,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            ExprError::Lex { message, .. } | ExprError::Parse { message, .. } => message,
        }
    }

    /// The source line with a caret marker under the offending span.
    pub fn render(&self, source: &str) -> String {
        let span = self.span();
        let start = span.start.min(source.len());
        let end = span.end.clamp(start, source.len());
        let pad = source[..start].chars().count();
        let width = source[start..end].chars().count().max(1);
        format!("{source}\n{}{}\n{}", " ".repeat(pad), "^".repeat(width), self.message())
    }
}
