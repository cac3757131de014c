//! Pel: a small pipe-oriented Lisp for orchestrating LLM agents.
//!
//! Everything is a call: `(op arg ...)` applies the operator in head
//! position, `[a b c]` builds a literal list, `x ▷ (f)` pipes a value into
//! the next call (into the first argument slot, or wherever `^` appears).
//! Function arguments may be positional or named with `:key value` pairs,
//! and calls missing required arguments evaluate to partial applications.
//!
//! The crates layered on top of the evaluator:
//!
//! - [`repel`]: restartable error handling with five restarts, including an
//!   LLM self-healing mode that proposes rewrites of the failing form.
//! - [`scheduler`]: dependency analysis over top-level forms and a
//!   concurrent runner that preserves sequential semantics.
//! - [`grammar`]: capability flags that restrict the surface syntax, with
//!   EBNF and regex exporters and a matching program sampler.
//! - [`agents`]: org charts of router and terminal agents, callable from
//!   Pel code as ordinary closures, plus round-robin meetings.

pub mod agents;
pub mod ast;
pub mod builtins;
pub mod closure;
pub mod doc;
pub mod env;
pub mod error;
pub mod eval;
pub mod grammar;
pub mod lexer;
pub mod llm;
pub mod num;
pub mod parser;
pub mod repel;
pub mod scheduler;
pub mod span;
pub mod value;

pub use ast::{Expr, ExprKind};
pub use doc::Docstring;
pub use env::Env;
pub use error::{ErrorKind, PelError, Result};
pub use eval::{Interp, Output};
pub use llm::{LlmBackend, ScriptedMock};
pub use num::PelNum;
pub use parser::parse_source;
pub use span::Span;
pub use value::PelValue;
