//! The single error type that flows through the whole runtime. Every failure
//! a Pel program can observe is a `PelError`; the REPL's restart machinery
//! and the self-healer both consume it.

use std::fmt;
use std::sync::Arc;

use crate::doc::Docstring;
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Lex,
    Parse,
    Eval,
}

/// What went wrong, as a matchable tag. The human-readable detail lives in
/// `PelError::message`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    LexError,
    ParseError,
    UnboundSymbol,
    RedefinitionOfBuiltin,
    NotCallable,
    MixedArguments,
    TooManyArguments,
    UnknownNamedArgument,
    DuplicateArgument,
    PipeTargetNotCall,
    IndexOutOfRange,
    KeyNotFound,
    AtWithSlice,
    BadIndexType,
    TypeMismatch,
    DivisionByZero,
    DefTargetNotSymbol,
    BadParamSpec,
    ConditionNotBool,
    OddCaseBody,
    IterTargetNotList,
    IteratorNotSymbol,
    RecursionLimit,
    BackendError,
    UnparseableFix,
    CoercionError,
    UnknownAgent,
    MalformedOrg,
    RouterCodeInvalid,
    CapabilityViolation,
    DepthTooLarge,
    IoError,
}

#[derive(Debug, Clone)]
pub struct PelError {
    pub kind: ErrorKind,
    pub message: String,
    pub span: Option<Span>,
    pub phase: Phase,
    /// Docstring of the innermost documented callable the error escaped from.
    pub context: Option<Arc<Docstring>>,
    /// Filled by the concurrent runner so failures can name their form.
    pub form_index: Option<usize>,
    /// True for lex/parse errors that only mean "input ended too soon"; the
    /// interactive reader keeps reading instead of reporting these.
    pub incomplete: bool,
}

impl PelError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> PelError {
        PelError {
            kind,
            message: message.into(),
            span: None,
            phase: Phase::Eval,
            context: None,
            form_index: None,
            incomplete: false,
        }
    }

    pub fn lex(message: impl Into<String>, span: Span) -> PelError {
        PelError { span: Some(span), phase: Phase::Lex, ..PelError::new(ErrorKind::LexError, message) }
    }

    pub fn parse(message: impl Into<String>, span: Span) -> PelError {
        PelError { span: Some(span), phase: Phase::Parse, ..PelError::new(ErrorKind::ParseError, message) }
    }

    pub fn with_span(mut self, span: Span) -> PelError {
        self.span = Some(span);
        self
    }

    /// Attach a span only when none is set; inner expressions win.
    pub fn or_span(mut self, span: Span) -> PelError {
        if self.span.is_none() {
            self.span = Some(span);
        }
        self
    }

    /// Attach the docstring of a callable the error passed through, keeping
    /// the innermost one.
    pub fn or_context(mut self, doc: Option<&Arc<Docstring>>) -> PelError {
        if self.context.is_none() {
            self.context = doc.cloned();
        }
        self
    }

    pub fn incomplete_input(mut self) -> PelError {
        self.incomplete = true;
        self
    }
}

impl fmt::Display for PelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "Error at line {}, col {}-{}: {}", s.line, s.col, s.end_col, self.message),
            None => write!(f, "Error: {}", self.message),
        }
    }
}

impl std::error::Error for PelError {}

pub type Result<T> = std::result::Result<T, PelError>;
