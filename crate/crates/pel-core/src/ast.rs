//! Syntax tree. `()` always means "call", `[...]` always means "list
//! literal", and `:key value` pairs are folded into `Pair` nodes by the
//! parser everywhere except under quote.

use std::fmt;

use crate::num::PelNum;
use crate::span::Span;
use crate::value::PelValue;

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(PelNum),
    Str(String),
    Bool(bool),
    Nil,
    Key(String),
    Symbol(String),
    /// `:key value` after folding. `value: None` means the key stood alone
    /// (which evaluates to a pair with a nil value but, in a parameter list,
    /// marks a parameter with no default).
    Pair { key: String, value: Option<Box<Expr>> },
    /// `(op arg ...)`; the operator slot is never pair-folded.
    Call { op: Box<Expr>, args: Vec<Expr> },
    List(Vec<Expr>),
    Quoted(Box<Expr>),
    /// Flat pipe chain of at least two stages.
    Pipe(Vec<Expr>),
    /// A value spliced in by the evaluator (pipe insertion, caret
    /// substitution, case dispatch). Never produced by the parser.
    Injected(PelValue),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    pub fn injected(value: PelValue, span: Span) -> Expr {
        Expr { kind: ExprKind::Injected(value), span }
    }

    pub fn symbol_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_key_atom(&self) -> bool {
        matches!(self.kind, ExprKind::Key(_))
    }

    /// Delimiter nesting depth: calls and list literals add one level,
    /// quotes and pipes are free.
    pub fn depth(&self) -> usize {
        match &self.kind {
            ExprKind::Call { op, args } => {
                1 + args.iter().map(Expr::depth).chain([op.depth()]).max().unwrap_or(0)
            }
            ExprKind::List(items) => 1 + items.iter().map(Expr::depth).max().unwrap_or(0),
            ExprKind::Quoted(inner) => inner.depth(),
            ExprKind::Pipe(stages) => stages.iter().map(Expr::depth).max().unwrap_or(0),
            ExprKind::Pair { value: Some(v), .. } => v.depth(),
            _ => 0,
        }
    }
}

/// Structural equality; spans are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(n) => write!(f, "{n}"),
            ExprKind::Str(s) => write!(f, "\"{s}\""),
            ExprKind::Bool(true) => write!(f, "#t"),
            ExprKind::Bool(false) => write!(f, "#f"),
            ExprKind::Nil => write!(f, "#nil"),
            ExprKind::Key(k) => write!(f, ":{k}"),
            ExprKind::Symbol(s) => write!(f, "{s}"),
            ExprKind::Pair { key, value: Some(v) } => write!(f, ":{key} {v}"),
            ExprKind::Pair { key, value: None } => write!(f, ":{key}"),
            ExprKind::Call { op, args } => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            ExprKind::List(items) => {
                write!(f, "[")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "]")
            }
            ExprKind::Quoted(inner) => write!(f, "'{inner}"),
            ExprKind::Pipe(stages) => {
                for (i, s) in stages.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ▷ ")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
            ExprKind::Injected(v) => write!(f, "{v}"),
        }
    }
}
