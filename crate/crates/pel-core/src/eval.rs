//! The tree-walking evaluator.
//!
//! Calls evaluate their operator first; whether the arguments are evaluated
//! depends on the callee (strict closures get values, non-strict builtins
//! get thunks that remember their environment). Under-application returns a
//! partial closure instead of failing. Literal lists are callable with
//! `:at` / `:from` / `:to` selectors. Pipe chains thread a value through
//! stages, substituting it at `^` carets when any are present.

use std::cell::Cell;
use std::io::Write;
use std::sync::{Arc, Mutex, RwLock};

use crate::agents::AgentRegistry;
use crate::ast::{Expr, ExprKind};
use crate::closure::{ArgValue, CallArguments, MergeOutcome, ParamDefault, PelClosure};
use crate::env::Env;
use crate::error::{ErrorKind, PelError, Result};
use crate::llm::LlmBackend;
use crate::num::PelNum;
use crate::scheduler::TraceLog;
use crate::span::Span;
use crate::value::PelValue;

/// Where `print` and the REPL write. A shared buffer keeps transcripts
/// deterministic under concurrent evaluation and lets tests capture output.
#[derive(Clone)]
pub enum Output {
    Stdout,
    Buffer(Arc<Mutex<Vec<u8>>>),
}

impl Output {
    pub fn buffer() -> Output {
        Output::Buffer(Arc::new(Mutex::new(Vec::new())))
    }

    pub fn write_str(&self, s: &str) {
        match self {
            Output::Stdout => {
                let mut out = std::io::stdout().lock();
                let _ = out.write_all(s.as_bytes());
                let _ = out.flush();
            }
            Output::Buffer(buf) => buf.lock().unwrap().extend_from_slice(s.as_bytes()),
        }
    }

    /// Contents so far, for buffered outputs.
    pub fn contents(&self) -> String {
        match self {
            Output::Stdout => String::new(),
            Output::Buffer(buf) => String::from_utf8_lossy(&buf.lock().unwrap()).into_owned(),
        }
    }
}

pub struct FiredCall {
    /// One entry per parameter, in declaration order, defaults filled in.
    pub args: Vec<ArgValue>,
    pub closure: Arc<PelClosure>,
    pub span: Span,
}

impl FiredCall {
    pub fn arg(&self, i: usize) -> &ArgValue {
        &self.args[i]
    }

    /// Force argument `i` to a value.
    pub fn value(&self, interp: &Interp, i: usize) -> Result<PelValue> {
        force(interp, &self.args[i])
    }
}

pub type BuiltinFn = fn(&Interp, &FiredCall) -> Result<PelValue>;

#[derive(Clone)]
pub struct Interp {
    pub global: Env,
    pub backend: Arc<dyn LlmBackend>,
    pub output: Output,
    pub agents: Arc<RwLock<AgentRegistry>>,
    /// Worker cap for concurrent evaluation.
    pub jobs: usize,
    /// Self-heal attempts per failing form.
    pub heal_cap: usize,
    /// Run top-level forms (and router programs) through the scheduler.
    pub async_mode: bool,
    /// Set while executing router-emitted code; confines meetings to the
    /// router's subtree.
    pub agent_scope: Option<String>,
    pub trace: Option<TraceLog>,
}

impl Interp {
    pub fn new(backend: Arc<dyn LlmBackend>) -> Interp {
        let global = Env::new();
        crate::builtins::install(&global);
        Interp {
            global,
            backend,
            output: Output::Stdout,
            agents: Arc::new(RwLock::new(AgentRegistry::default())),
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4),
            heal_cap: 3,
            async_mode: false,
            agent_scope: None,
            trace: None,
        }
    }

    /// Interpreter over a rule-less mock backend; any LLM touchpoint errors.
    /// Convenient for tests and the default CLI configuration.
    pub fn offline() -> Interp {
        Interp::new(Arc::new(crate::llm::ScriptedMock::empty()))
    }

    /// Parse and evaluate `src` in the global environment, returning the last
    /// form's value.
    pub fn eval_source(&self, src: &str) -> Result<PelValue> {
        let forms = crate::parser::parse_source(src)?;
        let mut last = PelValue::Nil;
        for form in &forms {
            last = eval(self, form, &self.global)?;
        }
        Ok(last)
    }
}

thread_local! {
    static DEPTH: Cell<usize> = const { Cell::new(0) };
}

const MAX_DEPTH: usize = 1000;

/// Evaluate an expression. Errors pick up the innermost expression's span.
pub fn eval(interp: &Interp, expr: &Expr, env: &Env) -> Result<PelValue> {
    let depth = DEPTH.with(|d| {
        let v = d.get() + 1;
        d.set(v);
        v
    });
    let result = if depth > MAX_DEPTH {
        Err(PelError::new(ErrorKind::RecursionLimit, format!("recursion deeper than {MAX_DEPTH} levels")))
    } else {
        // grow the native stack as needed so the Pel depth limit, not the
        // host thread's stack size, is what bounds recursion
        stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || eval_kind(interp, expr, env))
    };
    DEPTH.with(|d| d.set(d.get() - 1));
    result.map_err(|e| e.or_span(expr.span))
}

fn eval_kind(interp: &Interp, expr: &Expr, env: &Env) -> Result<PelValue> {
    match &expr.kind {
        ExprKind::Num(n) => Ok(PelValue::Num(*n)),
        ExprKind::Str(s) => Ok(PelValue::Str(s.clone())),
        ExprKind::Bool(b) => Ok(PelValue::Bool(*b)),
        ExprKind::Nil => Ok(PelValue::Nil),
        ExprKind::Key(k) => Ok(PelValue::Key(k.clone())),
        ExprKind::Injected(v) => Ok(v.clone()),
        ExprKind::Symbol(s) => env
            .lookup(s)
            .ok_or_else(|| PelError::new(ErrorKind::UnboundSymbol, format!("unbound symbol `{s}`"))),
        ExprKind::Pair { key, value } => {
            let v = match value {
                Some(e) => eval(interp, e, env)?,
                None => PelValue::Nil,
            };
            Ok(PelValue::Pair(key.clone(), Box::new(v)))
        }
        ExprKind::List(items) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                out.push(eval(interp, item, env)?);
            }
            Ok(PelValue::List(out))
        }
        ExprKind::Quoted(inner) => Ok(reify(inner)),
        ExprKind::Pipe(stages) => eval_pipe(interp, stages, env),
        ExprKind::Call { op, args } => eval_call(interp, op, args, expr.span, env),
    }
}

/// Quoted expressions become plain data: keys stay keys, symbols become
/// strings, calls and chains flatten into lists.
pub fn reify(expr: &Expr) -> PelValue {
    match &expr.kind {
        ExprKind::Num(n) => PelValue::Num(*n),
        ExprKind::Str(s) => PelValue::Str(s.clone()),
        ExprKind::Bool(b) => PelValue::Bool(*b),
        ExprKind::Nil => PelValue::Nil,
        ExprKind::Key(k) => PelValue::Key(k.clone()),
        ExprKind::Symbol(s) => PelValue::Str(s.clone()),
        ExprKind::Injected(v) => v.clone(),
        ExprKind::Pair { key, value } => {
            let v = value.as_ref().map(|e| reify(e)).unwrap_or(PelValue::Nil);
            PelValue::Pair(key.clone(), Box::new(v))
        }
        ExprKind::List(items) => PelValue::List(items.iter().map(reify).collect()),
        ExprKind::Call { op, args } => {
            let mut items = vec![reify(op)];
            items.extend(args.iter().map(reify));
            PelValue::List(items)
        }
        ExprKind::Quoted(inner) => PelValue::List(vec![PelValue::str("quote"), reify(inner)]),
        ExprKind::Pipe(stages) => {
            let mut items = Vec::new();
            for (i, s) in stages.iter().enumerate() {
                if i > 0 {
                    items.push(PelValue::str("▷"));
                }
                items.push(reify(s));
            }
            PelValue::List(items)
        }
    }
}

fn eval_call(interp: &Interp, op: &Expr, args: &[Expr], span: Span, env: &Env) -> Result<PelValue> {
    let callee = eval(interp, op, env)?;
    match callee {
        PelValue::Closure(closure) => {
            let call_args = collect_args(interp, args, closure.strict, span, env)
                .map_err(|e| e.or_context(closure.doc.as_ref()))?;
            apply(interp, &closure, call_args, span)
        }
        PelValue::List(items) => {
            let call_args = collect_args(interp, args, true, span, env)?;
            call_list(&items, call_args).map_err(|e| e.or_span(span))
        }
        other => Err(PelError::new(
            ErrorKind::NotCallable,
            format!("a {} is not callable", other.type_name()),
        )
        .with_span(span)),
    }
}

/// Split a call's argument expressions into all-positional or all-named.
/// Strict callees get evaluated values (left to right); non-strict callees
/// get thunks carrying the current environment.
fn collect_args(
    interp: &Interp,
    args: &[Expr],
    strict: bool,
    span: Span,
    env: &Env,
) -> Result<CallArguments> {
    let named_count = args.iter().filter(|a| matches!(a.kind, ExprKind::Pair { .. })).count();
    if named_count > 0 && named_count < args.len() {
        return Err(PelError::new(
            ErrorKind::MixedArguments,
            "Mixing named and positional arguments is not allowed.",
        )
        .with_span(span));
    }

    let to_arg = |interp: &Interp, e: &Expr| -> Result<ArgValue> {
        if strict {
            Ok(ArgValue::Value(eval(interp, e, env)?))
        } else {
            Ok(ArgValue::Thunk { expr: Arc::new(e.clone()), env: env.clone() })
        }
    };

    if named_count == 0 {
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(to_arg(interp, a)?);
        }
        Ok(CallArguments::Positional(vals))
    } else {
        let mut pairs = Vec::with_capacity(args.len());
        for a in args {
            let ExprKind::Pair { key, value } = &a.kind else { unreachable!() };
            let v = match value {
                Some(e) => to_arg(interp, e)?,
                None => ArgValue::Value(PelValue::Nil),
            };
            pairs.push((key.clone(), v));
        }
        Ok(CallArguments::Named(pairs))
    }
}

/// Force a callee argument to a value.
pub fn force(interp: &Interp, arg: &ArgValue) -> Result<PelValue> {
    match arg {
        ArgValue::Value(v) => Ok(v.clone()),
        ArgValue::Thunk { expr, env } => eval(interp, expr, env),
    }
}

/// Apply a closure to merged arguments: fire if saturated, otherwise return
/// the partial closure. Errors escaping a documented callable pick up its
/// docstring as context.
pub fn apply(
    interp: &Interp,
    closure: &Arc<PelClosure>,
    args: CallArguments,
    span: Span,
) -> Result<PelValue> {
    let run = || -> Result<PelValue> {
        match closure.merge_args(args)? {
            MergeOutcome::Partial(p) => Ok(PelValue::Closure(Arc::new(p))),
            MergeOutcome::Fire(slots) => {
                let mut fired = Vec::with_capacity(slots.len());
                for (slot, param) in slots.into_iter().zip(&closure.spec.params) {
                    match slot {
                        Some(a) => fired.push(a),
                        None => {
                            // defaults evaluate at fire time in the defining env
                            let v = match param.default.as_ref().expect("merge checked") {
                                ParamDefault::Value(v) => v.clone(),
                                ParamDefault::Expr(e) => eval(interp, e, &closure.env)?,
                            };
                            fired.push(ArgValue::Value(v));
                        }
                    }
                }
                match &closure.body {
                    crate::closure::ClosureBody::User { body } => {
                        let frame = closure.env.child();
                        for (param, arg) in closure.spec.params.iter().zip(&fired) {
                            let v = force(interp, arg)?;
                            frame.define(&param.name, v)?;
                        }
                        eval(interp, body, &frame)
                    }
                    crate::closure::ClosureBody::Builtin(f) => {
                        f(interp, &FiredCall { args: fired, closure: closure.clone(), span })
                    }
                }
            }
        }
    };
    run().map_err(|e| e.or_span(span).or_context(closure.doc.as_ref()))
}

/// `value ▷ stage`: insert the value as the stage's first argument, or at
/// every `^` caret when the stage contains any.
pub fn pipe_value_into(
    interp: &Interp,
    value: PelValue,
    value_span: Span,
    stage: &Expr,
    env: &Env,
) -> Result<PelValue> {
    let injected = Expr::injected(value, value_span);
    let rewritten = match &stage.kind {
        _ if has_caret(stage) => substitute_carets(stage, &injected),
        ExprKind::Call { op, args } => {
            let mut new_args = Vec::with_capacity(args.len() + 1);
            new_args.push(injected);
            new_args.extend(args.iter().cloned());
            Expr::new(ExprKind::Call { op: op.clone(), args: new_args }, stage.span)
        }
        ExprKind::List(_) => {
            // piping into a literal list selects from it: v ▷ [10 20] is ([10 20] v)
            Expr::new(ExprKind::Call { op: Box::new(stage.clone()), args: vec![injected] }, stage.span)
        }
        _ => {
            return Err(PelError::new(
                ErrorKind::PipeTargetNotCall,
                "pipe stages must be calls or literal lists",
            )
            .with_span(stage.span));
        }
    };
    eval(interp, &rewritten, env)
}

fn eval_pipe(interp: &Interp, stages: &[Expr], env: &Env) -> Result<PelValue> {
    let mut value = eval(interp, &stages[0], env)?;
    let mut value_span = stages[0].span;
    for stage in &stages[1..] {
        value = pipe_value_into(interp, value, value_span, stage, env)?;
        value_span = stage.span;
    }
    Ok(value)
}

/// Pipe a value through `target`, which may itself be a whole chain (as in
/// a case condition: scrut feeds the first stage, the rest follow).
pub fn pipe_value_through(
    interp: &Interp,
    value: PelValue,
    value_span: Span,
    target: &Expr,
    env: &Env,
) -> Result<PelValue> {
    match &target.kind {
        ExprKind::Pipe(stages) => {
            let mut v = value;
            let mut span = value_span;
            for stage in stages {
                v = pipe_value_into(interp, v, span, stage, env)?;
                span = stage.span;
            }
            Ok(v)
        }
        _ => pipe_value_into(interp, value, value_span, target, env),
    }
}

/// True when the expression contains a `^` symbol anywhere outside a quote.
pub fn has_caret(expr: &Expr) -> bool {
    match &expr.kind {
        ExprKind::Symbol(s) => s == "^",
        ExprKind::Pair { value: Some(v), .. } => has_caret(v),
        ExprKind::Call { op, args } => has_caret(op) || args.iter().any(has_caret),
        ExprKind::List(items) => items.iter().any(has_caret),
        ExprKind::Pipe(stages) => stages.iter().any(has_caret),
        ExprKind::Quoted(_) => false,
        _ => false,
    }
}

fn substitute_carets(expr: &Expr, injected: &Expr) -> Expr {
    let kind = match &expr.kind {
        ExprKind::Symbol(s) if s == "^" => return Expr { kind: injected.kind.clone(), span: expr.span },
        ExprKind::Pair { key, value } => ExprKind::Pair {
            key: key.clone(),
            value: value.as_ref().map(|v| Box::new(substitute_carets(v, injected))),
        },
        ExprKind::Call { op, args } => ExprKind::Call {
            op: Box::new(substitute_carets(op, injected)),
            args: args.iter().map(|a| substitute_carets(a, injected)).collect(),
        },
        ExprKind::List(items) => {
            ExprKind::List(items.iter().map(|i| substitute_carets(i, injected)).collect())
        }
        ExprKind::Pipe(stages) => {
            ExprKind::Pipe(stages.iter().map(|s| substitute_carets(s, injected)).collect())
        }
        other => other.clone(),
    };
    Expr { kind, span: expr.span }
}

/// A literal list in operator position: `(lst :at i)`, `(lst :from a :to b)`.
/// Positional arguments map to (at, from, to) in that order. Indices are
/// 1-based and inclusive; out-of-range access fails loudly.
fn call_list(items: &[PelValue], args: CallArguments) -> Result<PelValue> {
    let mut at = PelValue::Nil;
    let mut from = PelValue::Nil;
    let mut to = PelValue::Nil;
    match args {
        CallArguments::Positional(vals) => {
            if vals.len() > 3 {
                return Err(PelError::new(
                    ErrorKind::TooManyArguments,
                    format!("list call takes at most 3 arguments (:at :from :to), got {}", vals.len()),
                ));
            }
            let mut slots = [&mut at, &mut from, &mut to].into_iter();
            for v in vals {
                let ArgValue::Value(v) = v else { unreachable!("list calls are strict") };
                *slots.next().unwrap() = v;
            }
        }
        CallArguments::Named(pairs) => {
            let mut seen: Vec<String> = Vec::new();
            for (name, v) in pairs {
                let ArgValue::Value(v) = v else { unreachable!("list calls are strict") };
                if seen.contains(&name) {
                    return Err(PelError::new(
                        ErrorKind::DuplicateArgument,
                        format!("argument :{name} is already bound in this list call"),
                    ));
                }
                match name.as_str() {
                    "at" => at = v,
                    "from" => from = v,
                    "to" => to = v,
                    other => {
                        return Err(PelError::new(
                            ErrorKind::UnknownNamedArgument,
                            format!("list calls accept :at, :from and :to, not :{other}"),
                        ));
                    }
                }
                seen.push(name);
            }
        }
    }
    list_select(items, &at, &from, &to)
}

fn one_based(items: &[PelValue], n: &PelNum, what: &str) -> Result<usize> {
    let Some(i) = n.as_index() else {
        return Err(PelError::new(ErrorKind::BadIndexType, format!("{what} must be an integer, got {n}")));
    };
    if i < 1 || i as usize > items.len() {
        return Err(PelError::new(
            ErrorKind::IndexOutOfRange,
            format!("index {i} out of range for list of length {}", items.len()),
        ));
    }
    Ok(i as usize - 1)
}

fn pair_lookup(items: &[PelValue], key: &str) -> Result<PelValue> {
    for item in items {
        if let PelValue::Pair(k, v) = item {
            if k == key {
                return Ok((**v).clone());
            }
        }
    }
    Err(PelError::new(ErrorKind::KeyNotFound, format!("key :{key} not found in list")))
}

fn list_select(items: &[PelValue], at: &PelValue, from: &PelValue, to: &PelValue) -> Result<PelValue> {
    if !at.is_nil() && (!from.is_nil() || !to.is_nil()) {
        return Err(PelError::new(ErrorKind::AtWithSlice, ":at cannot be combined with :from/:to"));
    }
    match at {
        PelValue::Nil => {}
        PelValue::Num(n) => {
            let i = one_based(items, n, ":at")?;
            return Ok(items[i].clone());
        }
        PelValue::Key(k) => return pair_lookup(items, k),
        PelValue::List(sel) => {
            let mut out = Vec::with_capacity(sel.len());
            for s in sel {
                match s {
                    PelValue::Num(n) => out.push(items[one_based(items, n, ":at")?].clone()),
                    PelValue::Key(k) => out.push(pair_lookup(items, k)?),
                    other => {
                        return Err(PelError::new(
                            ErrorKind::BadIndexType,
                            format!(":at list entries must be numbers or keys, got {}", other.type_name()),
                        ));
                    }
                }
            }
            return Ok(PelValue::List(out));
        }
        other => {
            return Err(PelError::new(
                ErrorKind::BadIndexType,
                format!(":at must be a number, a key or a list of them, got {}", other.type_name()),
            ));
        }
    }

    // slice (or no arguments at all: the whole list)
    let lo = match from {
        PelValue::Nil => 0,
        PelValue::Num(n) => one_based(items, n, ":from")?,
        other => {
            return Err(PelError::new(
                ErrorKind::BadIndexType,
                format!(":from must be a number, got {}", other.type_name()),
            ));
        }
    };
    let hi = match to {
        PelValue::Nil => items.len().saturating_sub(1),
        PelValue::Num(n) => one_based(items, n, ":to")?,
        other => {
            return Err(PelError::new(
                ErrorKind::BadIndexType,
                format!(":to must be a number, got {}", other.type_name()),
            ));
        }
    };
    if items.is_empty() || lo > hi {
        return Ok(PelValue::List(Vec::new()));
    }
    Ok(PelValue::List(items[lo..=hi].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interp() -> Interp {
        Interp::offline()
    }

    fn run(src: &str) -> PelValue {
        interp().eval_source(src).unwrap()
    }

    fn run_err(src: &str) -> PelError {
        interp().eval_source(src).unwrap_err()
    }

    #[test]
    fn atoms_self_evaluate() {
        assert_eq!(run("5"), PelValue::int(5));
        assert_eq!(run("\"hi\""), PelValue::str("hi"));
        assert_eq!(run("#t"), PelValue::Bool(true));
        assert_eq!(run("#nil"), PelValue::Nil);
        assert_eq!(run(":k"), PelValue::Pair("k".into(), Box::new(PelValue::Nil)));
    }

    #[test]
    fn unbound_symbol_errors_with_span() {
        let e = run_err("(+ 1 missing)");
        assert_eq!(e.kind, ErrorKind::UnboundSymbol);
        assert_eq!(e.span.unwrap().col, 6);
    }

    #[test]
    fn literal_lists_evaluate_elementwise() {
        assert_eq!(
            run("[(+ 1 1) :k (+ 2 2)]"),
            PelValue::List(vec![
                PelValue::int(2),
                PelValue::Pair("k".into(), Box::new(PelValue::int(4))),
            ])
        );
    }

    #[test]
    fn quoting_yields_data() {
        assert_eq!(run("':a"), PelValue::Key("a".into()));
        assert_eq!(run("'[:a 1]"), PelValue::List(vec![PelValue::Key("a".into()), PelValue::int(1)]));
        assert_eq!(run("'sym"), PelValue::str("sym"));
        assert_eq!(
            run("'(f 1)"),
            PelValue::List(vec![PelValue::str("f"), PelValue::int(1)])
        );
    }

    #[test]
    fn list_at_examples() {
        assert_eq!(run("([5 6 7 8] :at 1)"), PelValue::int(5));
        assert_eq!(run("([5 6 7 8] :to 2)").to_string(), "[5 6]");
        assert_eq!(run("([5 6 7 8] :from 2)").to_string(), "[6 7 8]");
        assert_eq!(run("([5 6 7 8] :from 1 :to 3)").to_string(), "[5 6 7]");
        assert_eq!(run("([5 6 7 8] :at [1 3])").to_string(), "[5 7]");
        assert_eq!(run("([:a 1 :b 2 :c 3] :at ':a)"), PelValue::int(1));
        assert_eq!(run("([:a 1 :b 2 :c 3] :at [':a ':c])").to_string(), "[1 3]");
        assert_eq!(run("([:a 1 :b 2 :c 3] :at [1 3])").to_string(), "[:a 1 :c 3]");
    }

    #[test]
    fn list_positional_args_map_to_at_from_to() {
        assert_eq!(run("([5 6 7 8] 1)"), PelValue::int(5));
        assert_eq!(run("([5 6 7 8] () 1 3)").to_string(), "[5 6 7]");
        assert_eq!(run("([5 6 7 8] () 2)").to_string(), "[6 7 8]");
    }

    #[test]
    fn list_call_with_no_args_returns_the_list() {
        assert_eq!(run("([5 6 7])").to_string(), "[5 6 7]");
    }

    #[test]
    fn list_call_errors() {
        assert_eq!(run_err("([5 6] :at 0)").kind, ErrorKind::IndexOutOfRange);
        assert_eq!(run_err("([5 6] :at 3)").kind, ErrorKind::IndexOutOfRange);
        assert_eq!(run_err("([5 6] :from 1 :to 5)").kind, ErrorKind::IndexOutOfRange);
        assert_eq!(run_err("([:a 1] :at ':z)").kind, ErrorKind::KeyNotFound);
        assert_eq!(run_err("([5 6] :at 1 :to 2)").kind, ErrorKind::AtWithSlice);
        assert_eq!(run_err("([5 6] :at #t)").kind, ErrorKind::BadIndexType);
        assert_eq!(run_err("([5 6] :at 1.5)").kind, ErrorKind::BadIndexType);
        assert_eq!(run_err("([5 6] :banana 1)").kind, ErrorKind::UnknownNamedArgument);
        assert_eq!(run_err("([5 6] 1 2 3 4)").kind, ErrorKind::TooManyArguments);
    }

    #[test]
    fn empty_slice_when_from_exceeds_to() {
        assert_eq!(run("([5 6 7] :from 3 :to 2)").to_string(), "[]");
    }

    #[test]
    fn not_callable_values() {
        assert_eq!(run_err("(5 1)").kind, ErrorKind::NotCallable);
        assert_eq!(run_err("(\"s\")").kind, ErrorKind::NotCallable);
        assert_eq!(run_err("(:k 1)").kind, ErrorKind::NotCallable);
    }

    #[test]
    fn mixed_arguments_message_is_verbatim() {
        let e = run_err("(print [\"hello\"] :sep \" \")");
        assert_eq!(e.kind, ErrorKind::MixedArguments);
        assert_eq!(e.message, "Mixing named and positional arguments is not allowed.");
        assert!(e.context.is_some(), "documented builtin should attach its docstring");
    }

    #[test]
    fn pipe_first_arg_insertion() {
        assert_eq!(run("[1 2 3 4] ▷ (len) ▷ (+ 5)"), PelValue::int(9));
    }

    #[test]
    fn pipe_caret_substitution() {
        assert_eq!(run("\"world\" ▷ (concat \"hello, \" ^)"), PelValue::str("hello, world"));
        assert_eq!(run("5 ▷ (* 10 ^)"), PelValue::int(50));
        // the piped value is evaluated once and reused at every caret
        assert_eq!(run("3 ▷ (* ^ ^)"), PelValue::int(9));
    }

    #[test]
    fn caret_under_quote_is_not_substituted() {
        // the quoted caret is data, so the pipe falls back to first-arg insertion
        let v = run("(def f (lambda [:a :b] [a b])) 5 ▷ (f ['^])");
        assert_eq!(v.to_string(), "[5 [\"^\"]]");
    }

    #[test]
    fn pipe_into_literal_list_selects() {
        assert_eq!(run("2 ▷ [10 20 30]"), PelValue::int(20));
        assert_eq!(run("5 ▷ [1 ^ 3]").to_string(), "[1 5 3]");
    }

    #[test]
    fn pipe_stage_must_be_call_or_list() {
        let e = run_err("(def f (lambda [:x] x)) 5 ▷ f");
        assert_eq!(e.kind, ErrorKind::PipeTargetNotCall);
    }

    #[test]
    fn pipe_chains_nest_in_argument_position() {
        assert_eq!(run("(+ 1 ▷ (* 3) 2)"), PelValue::int(5));
    }

    #[test]
    fn strict_arguments_evaluate_left_to_right() {
        let i = interp();
        i.global.define("n", PelValue::int(0)).unwrap();
        let out = Output::buffer();
        let i = Interp { output: out.clone(), ..i };
        i.eval_source("(concat (print :vals \"a\" :nl #f) (print :vals \"b\" :nl #f))").unwrap();
        assert_eq!(out.contents(), "ab");
    }

    #[test]
    fn recursion_is_bounded() {
        let e = run_err("(def loop (lambda [:x] (loop x))) (loop 1)");
        assert_eq!(e.kind, ErrorKind::RecursionLimit);
    }
}
