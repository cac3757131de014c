//! Capability-restricted grammar: validation, EBNF export and bounded-depth
//! regex export.
//!
//! A `CapabilityConfig` switches language features off wholesale (pipes,
//! quoting, literal lists, do/async), bans individual symbols, or closes the
//! symbol set entirely so only an explicit allowlist remains callable. The
//! same config drives three consumers that must agree: the validator (AST
//! walk), the grammar exporters (for constrained decoding of generated
//! code), and the random sampler used to fuzz that agreement.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

use crate::ast::{Expr, ExprKind};
use crate::builtins::BUILTIN_NAMES;
use crate::error::{ErrorKind, PelError, Result};
use crate::span::Span;

/// Rendered regexes larger than this are refused: the pattern grows
/// exponentially with depth and would stall downstream compilers.
pub const REGEX_SIZE_CAP: usize = 1024 * 1024;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapabilityConfig {
    pub allow_pipe: bool,
    pub allow_quote: bool,
    pub allow_literal_list: bool,
    pub allow_do_async: bool,
    /// Symbols that may not appear at all.
    pub disabled_symbols: HashSet<String>,
    /// With `closed_symbol_set`, the only non-builtin symbols permitted.
    pub allowed_symbols: HashSet<String>,
    pub max_nesting_depth: Option<usize>,
    pub closed_symbol_set: bool,
}

impl Default for CapabilityConfig {
    fn default() -> CapabilityConfig {
        CapabilityConfig {
            allow_pipe: true,
            allow_quote: true,
            allow_literal_list: true,
            allow_do_async: true,
            disabled_symbols: HashSet::new(),
            allowed_symbols: HashSet::new(),
            max_nesting_depth: None,
            closed_symbol_set: false,
        }
    }
}

// serde(default) on the struct needs field defaults too
impl CapabilityConfig {
    pub fn load(path: &std::path::Path) -> Result<CapabilityConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PelError::new(ErrorKind::IoError, format!("cannot read capability file {}: {e}", path.display()))
        })?;
        CapabilityConfig::from_toml(&text)
            .map_err(|e| PelError::new(ErrorKind::IoError, format!("{}: {}", path.display(), e.message)))
    }

    pub fn from_toml(text: &str) -> Result<CapabilityConfig> {
        toml::from_str(text).map_err(|e| PelError::new(ErrorKind::IoError, format!("bad capability config: {e}")))
    }

    /// Whether a closed symbol set admits this reference. Locally bound
    /// names (defs, params, iterators) are the caller's business.
    fn in_closed_set(&self, name: &str) -> bool {
        name == "^" || crate::builtins::is_builtin(name) || self.allowed_symbols.contains(name)
    }

    /// The sampler and the closed-set exports draw symbols from this pool.
    fn symbol_pool(&self) -> Vec<String> {
        let mut pool: Vec<String> = if self.closed_symbol_set {
            BUILTIN_NAMES
                .iter()
                .map(|s| s.to_string())
                .chain(self.allowed_symbols.iter().cloned())
                .collect()
        } else {
            ["x", "y", "n", "acc", "foo", "bar", "my-fn", "total", "+", "*", "len", "concat", "print"]
                .iter()
                .map(|s| s.to_string())
                .collect()
        };
        pool.retain(|s| !self.disabled_symbols.contains(s));
        if !self.allow_do_async {
            pool.retain(|s| s != "do/async");
        }
        pool.sort();
        pool.dedup();
        pool
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub message: String,
    pub span: Span,
    /// Which capability the node trips.
    pub flag: &'static str,
}

/// Syntactic check of already-parsed forms against a capability config.
/// Quoted code is still scanned: a disabled construct may not appear even as
/// data, since the point is to constrain generated text. Under a closed
/// symbol set, names the program itself binds (def targets, lambda
/// parameters, for iterators) stay legal.
pub fn validate(forms: &[Expr], caps: &CapabilityConfig) -> Vec<Violation> {
    let mut bound: HashSet<String> = HashSet::new();
    if caps.closed_symbol_set {
        for form in forms {
            bound.extend(crate::scheduler::defined_symbols(form));
        }
    }
    let mut out = Vec::new();
    for form in forms {
        if let Some(max) = caps.max_nesting_depth {
            let d = form.depth();
            if d > max {
                out.push(Violation {
                    message: format!("nesting depth {d} exceeds the configured maximum of {max}"),
                    span: form.span,
                    flag: "max_nesting_depth",
                });
            }
        }
        check(form, caps, &bound, &mut out);
    }
    out
}

fn check(expr: &Expr, caps: &CapabilityConfig, bound: &HashSet<String>, out: &mut Vec<Violation>) {
    match &expr.kind {
        ExprKind::Pipe(stages) => {
            if !caps.allow_pipe {
                out.push(Violation {
                    message: "the pipe operator is disabled".to_string(),
                    span: expr.span,
                    flag: "allow_pipe",
                });
            }
            for s in stages {
                check(s, caps, bound, out);
            }
        }
        ExprKind::Quoted(inner) => {
            if !caps.allow_quote {
                out.push(Violation {
                    message: "quoted expressions are disabled".to_string(),
                    span: expr.span,
                    flag: "allow_quote",
                });
            }
            check(inner, caps, bound, out);
        }
        ExprKind::List(items) => {
            if !caps.allow_literal_list {
                out.push(Violation {
                    message: "literal lists are disabled".to_string(),
                    span: expr.span,
                    flag: "allow_literal_list",
                });
            }
            for i in items {
                check(i, caps, bound, out);
            }
        }
        ExprKind::Symbol(s) => {
            if s == "do/async" && !caps.allow_do_async {
                out.push(Violation {
                    message: "do/async is disabled".to_string(),
                    span: expr.span,
                    flag: "allow_do_async",
                });
            } else if caps.disabled_symbols.contains(s.as_str()) {
                out.push(Violation {
                    message: format!("symbol `{s}` is disabled"),
                    span: expr.span,
                    flag: "disabled_symbols",
                });
            } else if caps.closed_symbol_set && !bound.contains(s.as_str()) && !caps.in_closed_set(s) {
                out.push(Violation {
                    message: format!("symbol `{s}` is outside the allowed symbol set"),
                    span: expr.span,
                    flag: "closed_symbol_set",
                });
            }
        }
        ExprKind::Call { op, args } => {
            check(op, caps, bound, out);
            match op.symbol_name() {
                Some("lambda") => check_binder(args, caps, bound, out, BinderShape::Lambda),
                Some("for") => check_binder(args, caps, bound, out, BinderShape::For),
                _ => {
                    for a in args {
                        check(a, caps, bound, out);
                    }
                }
            }
        }
        ExprKind::Pair { value: Some(v), .. } => check(v, caps, bound, out),
        _ => {}
    }
}

enum BinderShape {
    Lambda,
    For,
}

/// Shared handling for the two binding forms: their parameters/iterator
/// extend the bound set for the body, while everything else (defaults, the
/// collection) is checked in the enclosing scope.
fn check_binder(args: &[Expr], caps: &CapabilityConfig, bound: &HashSet<String>, out: &mut Vec<Violation>, shape: BinderShape) {
    let (scoped, body) = match shape {
        BinderShape::Lambda => (crate::scheduler::arg_by(args, 0, "params"), crate::scheduler::arg_by(args, 1, "body")),
        BinderShape::For => (crate::scheduler::arg_by(args, 1, "iterator"), crate::scheduler::arg_by(args, 2, "body")),
    };
    let mut inner = bound.clone();
    match (&shape, scoped.map(|e| &e.kind)) {
        (BinderShape::Lambda, Some(ExprKind::List(items))) => {
            if !caps.allow_literal_list {
                out.push(Violation {
                    message: "literal lists are disabled".to_string(),
                    span: scoped.unwrap().span,
                    flag: "allow_literal_list",
                });
            }
            for item in items {
                match &item.kind {
                    ExprKind::Pair { key, value } => {
                        if let Some(v) = value {
                            check(v, caps, bound, out);
                        }
                        inner.insert(key.clone());
                    }
                    _ => check(item, caps, bound, out),
                }
            }
        }
        (BinderShape::For, Some(ExprKind::Symbol(s))) => {
            inner.insert(s.clone());
        }
        (_, Some(_)) => check(scoped.unwrap(), caps, bound, out),
        (_, None) => {}
    }
    for a in args {
        let handled = scoped.map_or(false, |p| std::ptr::eq(a, p))
            || body.map_or(false, |b| std::ptr::eq(a, b))
            || matches!(&a.kind, ExprKind::Pair { value: Some(v), .. }
                if scoped.map_or(false, |p| std::ptr::eq(v.as_ref(), p)) || body.map_or(false, |b| std::ptr::eq(v.as_ref(), b)));
        if !handled {
            check(a, caps, bound, out);
        }
    }
    if let Some(b) = body {
        check(b, caps, &inner, out);
    }
}

/// EBNF text for the language as restricted by `caps`.
pub fn export_ebnf(caps: &CapabilityConfig) -> String {
    let mut g = String::new();
    g.push_str("program            = { expression } ;\n");
    if caps.allow_pipe {
        g.push_str("expression         = unit , { PIPE , unit } ;\n");
    } else {
        g.push_str("expression         = unit ;\n");
    }
    if caps.allow_quote {
        g.push_str("unit               = quoted_expression | datum ;\n");
        g.push_str("quoted_expression  = QUOTE , expression ;\n");
    } else {
        g.push_str("unit               = datum ;\n");
    }
    if caps.allow_literal_list {
        g.push_str("datum              = call | literal_list | atom ;\n");
    } else {
        g.push_str("datum              = call | atom ;\n");
    }
    g.push_str("call               = \"(\" , { call_element } , \")\" ;\n");
    g.push_str("call_element       = named_argument | expression ;\n");
    g.push_str("named_argument     = KEY , expression ;\n");
    if caps.allow_literal_list {
        g.push_str("literal_list       = \"[\" , { list_element } , \"]\" ;\n");
        g.push_str("list_element       = named_argument | expression ;\n");
    }
    g.push_str("atom               = NUMBER | STRING | BOOL | NIL | KEY | SYMBOL ;\n");
    g.push_str("\n");
    g.push_str("NUMBER             = [ \"-\" ] , DIGIT , { DIGIT } , [ \".\" , DIGIT , { DIGIT } ] ;\n");
    g.push_str("STRING             = '\"' , { CHARACTER - '\"' } , '\"' ;\n");
    g.push_str("BOOL               = \"#t\" | \"#f\" ;\n");
    g.push_str("NIL                = \"#nil\" ;\n");
    g.push_str("KEY                = \":\" , KEYCHAR , { KEYCHAR } ;\n");
    g.push_str("KEYCHAR            = LETTER | DIGIT | \"_\" | \"+\" | \"*\" | \"/\" | \"?\" | \"!\" | \"<\" | \"=\" | \">\" | \".\" | \"-\" ;\n");
    if caps.closed_symbol_set {
        let pool = caps.symbol_pool();
        let alts: Vec<String> = pool.iter().map(|s| format!("\"{s}\"")).collect();
        let _ = writeln!(g, "SYMBOL             = {} ;", alts.join(" | "));
    } else {
        g.push_str("SYMBOL             = SYMCHAR , { SYMCHAR } ;\n");
        g.push_str("SYMCHAR            = CHARACTER - ( WHITESPACE | \"(\" | \")\" | \"[\" | \"]\" | '\"' | \";\" | \"'\" | \"\u{25B7}\" | \"|\" ) ;\n");
    }
    if caps.allow_pipe {
        g.push_str("PIPE               = \"\u{25B7}\" | \"|>\" ;\n");
    }
    if caps.allow_quote {
        g.push_str("QUOTE              = \"'\" ;\n");
    }
    g.push_str("COMMENT            = \";\" , { CHARACTER - NEWLINE } ;\n");
    g.push_str("WHITESPACE         = \" \" | TAB | CR | NEWLINE ;\n");
    let mut disabled: Vec<&str> = caps.disabled_symbols.iter().map(|s| s.as_str()).collect();
    if !caps.allow_do_async {
        disabled.push("do/async");
    }
    disabled.sort();
    disabled.dedup();
    if !disabled.is_empty() {
        let _ = writeln!(g, "\n(* disabled symbols: {} *)", disabled.join(", "));
    }
    g
}

/// Pattern tree shared by the regex renderer and the sampler, so whatever
/// the sampler emits is in the exported regex's language by construction.
/// Children are reference-counted: each nesting level reuses the previous
/// level's pattern, keeping construction linear in depth even though the
/// rendered regex grows exponentially.
enum Pat {
    Lit(&'static str),
    /// Terminal with a hand-written regex fragment plus exemplars to sample.
    Class { regex: String, samples: Vec<String> },
    Seq(Vec<Rc<Pat>>),
    Alt(Vec<Rc<Pat>>),
    Star(Rc<Pat>),
    Opt(Rc<Pat>),
}

fn ws_opt() -> Rc<Pat> {
    Rc::new(Pat::Class { regex: "[ \\t\\r\\n]*".to_string(), samples: vec!["".into(), " ".into()] })
}

fn ws_req() -> Rc<Pat> {
    Rc::new(Pat::Class { regex: "[ \\t\\r\\n]+".to_string(), samples: vec![" ".into(), "  ".into(), "\n".into()] })
}

fn escape_regex(s: &str) -> String {
    // escape exactly the regex meta characters: over-escaping punctuation is
    // not harmless ('\>' is a word-boundary assertion, not a literal '>')
    let mut out = String::new();
    for ch in s.chars() {
        if matches!(
            ch,
            '\\' | '.' | '+' | '*' | '?' | '(' | ')' | '|' | '[' | ']' | '{' | '}' | '^' | '$'
                | '#' | '&' | '-' | '~'
        ) {
            out.push('\\');
        }
        out.push(ch);
    }
    out
}

fn atom(caps: &CapabilityConfig) -> Rc<Pat> {
    let number = Pat::Class {
        regex: "-?[0-9]+(?:\\.[0-9]+)?".to_string(),
        samples: ["0", "1", "2", "3", "7", "42", "-5", "3.5", "0.25", "100"].iter().map(|s| s.to_string()).collect(),
    };
    let string = Pat::Class {
        regex: "\"[^\"]*\"".to_string(),
        samples: ["\"\"", "\"hi\"", "\"hello world\"", "\"a b\""].iter().map(|s| s.to_string()).collect(),
    };
    let key = Pat::Class {
        regex: ":[a-zA-Z0-9_+*/?!<=>.-]+".to_string(),
        samples: [":x", ":vals", ":sep", ":name", ":coll"].iter().map(|s| s.to_string()).collect(),
    };
    let pool = caps.symbol_pool();
    let symbol = if caps.closed_symbol_set {
        let mut names: Vec<String> = pool.iter().map(|s| escape_regex(s)).collect();
        names.sort_by_key(|s| std::cmp::Reverse(s.len()));
        Pat::Class { regex: format!("(?:{})", names.join("|")), samples: pool }
    } else {
        Pat::Class { regex: "[^ \\t\\r\\n()\\[\\]\"';|\u{25B7}:#][^ \\t\\r\\n()\\[\\]\"';|\u{25B7}]*".to_string(), samples: pool }
    };
    Rc::new(Pat::Alt(vec![
        Rc::new(number),
        Rc::new(string),
        Rc::new(Pat::Lit("#t")),
        Rc::new(Pat::Lit("#f")),
        Rc::new(Pat::Lit("#nil")),
        Rc::new(key),
        Rc::new(symbol),
    ]))
}

/// One nesting level: an atom, or brackets whose elements are the previous
/// level's chain pattern (None at depth zero).
fn unit(caps: &CapabilityConfig, atom: &Rc<Pat>, inner: Option<&Rc<Pat>>) -> Rc<Pat> {
    let mut alts = vec![atom.clone()];
    if let Some(elem) = inner {
        alts.push(bracketed(elem, "(", ")"));
        if caps.allow_literal_list {
            alts.push(bracketed(elem, "[", "]"));
        }
    }
    let core = Rc::new(Pat::Alt(alts));
    if caps.allow_quote {
        let quote = Rc::new(Pat::Seq(vec![Rc::new(Pat::Lit("'")), ws_opt()]));
        Rc::new(Pat::Seq(vec![Rc::new(Pat::Star(quote)), core]))
    } else {
        core
    }
}

fn chain(caps: &CapabilityConfig, unit: Rc<Pat>) -> Rc<Pat> {
    if !caps.allow_pipe {
        return unit;
    }
    let pipe = Rc::new(Pat::Alt(vec![Rc::new(Pat::Lit("\u{25B7}")), Rc::new(Pat::Lit("|>"))]));
    let tail = Rc::new(Pat::Seq(vec![ws_opt(), pipe, ws_opt(), unit.clone()]));
    Rc::new(Pat::Seq(vec![unit, Rc::new(Pat::Star(tail))]))
}

fn bracketed(elem: &Rc<Pat>, open: &'static str, close: &'static str) -> Rc<Pat> {
    let more = Rc::new(Pat::Seq(vec![ws_req(), elem.clone()]));
    Rc::new(Pat::Seq(vec![
        Rc::new(Pat::Lit(open)),
        ws_opt(),
        Rc::new(Pat::Opt(Rc::new(Pat::Seq(vec![elem.clone(), Rc::new(Pat::Star(more)), ws_opt()])))),
        Rc::new(Pat::Lit(close)),
    ]))
}

fn program_pattern(caps: &CapabilityConfig, depth: usize) -> Rc<Pat> {
    let atom = atom(caps);
    let mut form = chain(caps, unit(caps, &atom, None));
    for _ in 0..depth {
        form = chain(caps, unit(caps, &atom, Some(&form)));
    }
    let more = Rc::new(Pat::Seq(vec![ws_req(), form.clone()]));
    Rc::new(Pat::Seq(vec![
        ws_opt(),
        Rc::new(Pat::Opt(Rc::new(Pat::Seq(vec![form, Rc::new(Pat::Star(more))])))),
        ws_opt(),
    ]))
}

fn render(pat: &Pat, out: &mut String, cap: usize) -> Result<()> {
    if out.len() > cap {
        return Err(PelError::new(
            ErrorKind::DepthTooLarge,
            format!("rendered regex exceeds {cap} bytes; reduce the depth"),
        ));
    }
    match pat {
        Pat::Lit(s) => out.push_str(&escape_regex(s)),
        Pat::Class { regex, .. } => out.push_str(regex),
        Pat::Seq(items) => {
            for i in items {
                render(i, out, cap)?;
            }
        }
        Pat::Alt(items) => {
            out.push_str("(?:");
            for (n, i) in items.iter().enumerate() {
                if n > 0 {
                    out.push('|');
                }
                render(i, out, cap)?;
            }
            out.push(')');
        }
        Pat::Star(inner) => {
            out.push_str("(?:");
            render(inner, out, cap)?;
            out.push_str(")*");
        }
        Pat::Opt(inner) => {
            out.push_str("(?:");
            render(inner, out, cap)?;
            out.push_str(")?");
        }
    }
    Ok(())
}

/// Anchored regex matching whole programs nested at most `depth` levels
/// deep (delimiters only, matching `Expr::depth`). The size of the pattern
/// grows exponentially with depth; past [`REGEX_SIZE_CAP`] this refuses.
pub fn export_regex(caps: &CapabilityConfig, depth: usize) -> Result<String> {
    let depth = match caps.max_nesting_depth {
        Some(max) => depth.min(max),
        None => depth,
    };
    let pat = program_pattern(caps, depth);
    let mut out = String::from("^");
    render(&pat, &mut out, REGEX_SIZE_CAP)?;
    out.push('$');
    if out.len() > REGEX_SIZE_CAP {
        return Err(PelError::new(
            ErrorKind::DepthTooLarge,
            format!("rendered regex exceeds {REGEX_SIZE_CAP} bytes; reduce the depth"),
        ));
    }
    Ok(out)
}

fn sample(pat: &Pat, rng: &mut impl Rng, out: &mut String) {
    match pat {
        Pat::Lit(s) => out.push_str(s),
        Pat::Class { samples, .. } => out.push_str(samples.choose(rng).expect("terminals carry exemplars")),
        Pat::Seq(items) => {
            for i in items {
                sample(i, rng, out);
            }
        }
        Pat::Alt(items) => sample(items.choose(rng).expect("alternations are nonempty"), rng, out),
        Pat::Star(inner) => {
            for _ in 0..rng.gen_range(0..=2) {
                sample(inner, rng, out);
            }
        }
        Pat::Opt(inner) => {
            if rng.gen_bool(0.7) {
                sample(inner, rng, out);
            }
        }
    }
}

/// Random program text drawn from the same pattern tree `export_regex`
/// renders, so every sample matches the exported regex by construction.
pub fn sample_program(caps: &CapabilityConfig, depth: usize, rng: &mut impl Rng) -> String {
    let depth = match caps.max_nesting_depth {
        Some(max) => depth.min(max),
        None => depth,
    };
    let pat = program_pattern(caps, depth);
    let mut out = String::new();
    sample(&pat, rng, &mut out);
    out
}
