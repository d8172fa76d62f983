//! Concrete syntax for LDGV (`.ldgv`) and LSST (`.lsst`) programs.
//!
//! The grammar is layout-free. An expression ends where the next top-level
//! item or the next `let` binding begins; both are recognised by a short
//! lookahead (`x =`, `(x, y) =`, `f x y =`, `f :`).

mod ldgv;
mod lexer;
mod lsst;

pub use ldgv::{parse_expr, parse_ldgv, parse_type, parse_value};
pub use lexer::{lex, Tok, Token};
pub use lsst::{parse_lsst, parse_lsst_type};

use std::fmt;

use crate::ast::SourcePos;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ParseErrorKind {
    Syntax,
    DuplicateDefinition,
    UnknownTypeName,
    MissingAnnotation,
}

impl ParseErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "SyntaxError",
            ParseErrorKind::DuplicateDefinition => "DuplicateDefinition",
            ParseErrorKind::UnknownTypeName => "UnknownTypeName",
            ParseErrorKind::MissingAnnotation => "MissingAnnotation",
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{pos}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: SourcePos,
    /// Tokens that would have been accepted at `pos`.
    pub expected: Vec<String>,
    pub message: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, pos: SourcePos, message: impl Into<String>) -> Self {
        ParseError { kind, pos, expected: Vec::new(), message: message.into() }
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "type", "let", "in", "case", "of", "rec", "natrec", "new", "fork", "send", "recv", "select",
    "rcase", "close", "wait", "dualof", "lambda", "with", "end",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

type PResult<T> = Result<T, ParseError>;

/// Token stream with the lookahead predicates shared by both dialects.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    i: usize,
    /// Depth of brackets and open `let` binding blocks. Top-level items are
    /// only recognised at depth zero.
    pub nest: u32,
}

impl Cursor {
    pub fn new(src: &str) -> PResult<Cursor> {
        Ok(Cursor { toks: lex(src)?, i: 0, nest: 0 })
    }

    pub fn mark(&self) -> usize {
        self.i
    }

    pub fn reset(&mut self, m: usize) {
        self.i = m;
    }

    pub fn peek(&self) -> &Tok {
        self.peek_at(0)
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    pub fn pos(&self) -> SourcePos {
        self.toks[self.i.min(self.toks.len() - 1)].pos
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.i.min(self.toks.len() - 1)].clone();
        if self.i < self.toks.len() - 1 {
            self.i += 1;
        }
        t
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub fn sym_at(&self, k: usize, s: &str) -> bool {
        matches!(self.peek_at(k), Tok::Sym(t) if *t == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> PResult<SourcePos> {
        if self.is_sym(s) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&[&format!("`{s}`")]))
        }
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        self.kw_at(0, kw)
    }

    pub fn kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident(t) if t == kw)
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> PResult<SourcePos> {
        if self.is_kw(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")]))
        }
    }

    pub fn upper_at(&self, k: usize, s: &str) -> bool {
        matches!(self.peek_at(k), Tok::Upper(t) if t == s)
    }

    /// A non-keyword lowercase identifier (including `_`) at offset `k`.
    pub fn var_at(&self, k: usize) -> bool {
        matches!(self.peek_at(k), Tok::Ident(t) if !is_keyword(t))
    }

    pub fn expect_var(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(t) if !is_keyword(&t) => {
                self.bump();
                Ok(t)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    pub fn expect_label(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Upper(t) | Tok::Quoted(t) => {
                self.bump();
                Ok(t)
            }
            _ => Err(self.unexpected(&["label"])),
        }
    }

    /// `x =` or `(x, y) =`.
    pub fn at_binding_start(&self) -> bool {
        if self.var_at(0) && self.sym_at(1, "=") {
            return true;
        }
        self.is_sym("(")
            && self.var_at(1)
            && self.sym_at(2, ",")
            && self.var_at(3)
            && self.sym_at(4, ")")
            && self.sym_at(5, "=")
    }

    /// `type`, `f :` or `f x y =`.
    pub fn at_item_start(&self) -> bool {
        if self.is_kw("type") {
            return true;
        }
        if !self.var_at(0) {
            return false;
        }
        if self.sym_at(1, ":") {
            return true;
        }
        let mut k = 1;
        while self.var_at(k) {
            k += 1;
        }
        self.sym_at(k, "=")
    }

    /// Whether an application argument may start here.
    pub fn continues_application(&self) -> bool {
        if self.at_binding_start() || (self.nest == 0 && self.at_item_start()) {
            return false;
        }
        match self.peek() {
            Tok::Ident(t) => !is_keyword(t) || t == "case" || t == "rec" || t == "natrec",
            Tok::Upper(_) | Tok::Quoted(_) | Tok::Int(_) => true,
            Tok::Sym(s) => *s == "(" || *s == "<",
            Tok::Eof => false,
        }
    }

    pub fn unexpected(&self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            Tok::Ident(s) | Tok::Upper(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("`'{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        let message = if expected.is_empty() {
            format!("unexpected {found}")
        } else {
            format!("expected {}, found {found}", expected.join(" or "))
        };
        ParseError {
            kind: ParseErrorKind::Syntax,
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message,
        }
    }
}
