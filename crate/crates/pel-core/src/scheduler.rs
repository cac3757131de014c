//! Automatic parallel execution of top-level forms.
//!
//! A purely syntactic pre-scan computes, for every form, the symbols it
//! defines (any `def` inside it, however nested) and the free symbols it
//! uses. Forms are ordered by read-after-write, write-after-write and
//! write-after-read overlaps; everything else may run concurrently. The
//! observable result must equal sequential evaluation, so the analysis errs
//! on the side of extra edges.

use std::collections::HashSet;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use crate::ast::{Expr, ExprKind};
use crate::builtins::is_builtin;
use crate::env::Env;
use crate::error::Result;
use crate::eval::{eval, Interp};
use crate::value::PelValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Start,
    Finish,
}

#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub form: usize,
    pub what: TraceKind,
    /// Microseconds since the run began.
    pub at_micros: u128,
}

pub type TraceLog = Arc<Mutex<Vec<TraceEvent>>>;

pub fn new_trace() -> TraceLog {
    Arc::new(Mutex::new(Vec::new()))
}

#[derive(Debug)]
pub struct FormMeta {
    pub index: usize,
    pub defines: HashSet<String>,
    pub uses: HashSet<String>,
}

#[derive(Debug)]
pub struct DepGraph {
    pub nodes: Vec<FormMeta>,
    /// (i, j) with i < j: form j must wait for form i.
    pub edges: Vec<(usize, usize)>,
}

/// Build the dependency graph for a program. Total: never fails, even on
/// programs that would error at runtime.
pub fn analyze(program: &[Expr]) -> DepGraph {
    let mut nodes = Vec::with_capacity(program.len());
    for (index, form) in program.iter().enumerate() {
        let defines = defined_symbols(form);
        let mut uses = free_symbols(form, &HashSet::new());
        // reads of a symbol the form itself defines stay internal; cross-form
        // ordering against other writers is preserved by the WAW/WAR edges
        uses.retain(|s| !defines.contains(s));
        nodes.push(FormMeta { index, defines, uses });
    }
    let mut edges = Vec::new();
    for j in 0..nodes.len() {
        for i in 0..j {
            let (a, b) = (&nodes[i], &nodes[j]);
            let raw = b.uses.intersection(&a.defines).next().is_some();
            let waw = b.defines.intersection(&a.defines).next().is_some();
            let war = b.defines.intersection(&a.uses).next().is_some();
            if raw || waw || war {
                edges.push((i, j));
            }
        }
    }
    DepGraph { nodes, edges }
}

/// Symbols bound by any `def` inside the expression, however deeply nested
/// (lambda bodies included: a def in there may run). Quoted code is data.
pub fn defined_symbols(expr: &Expr) -> HashSet<String> {
    let mut out = HashSet::new();
    collect_defines(expr, &mut out);
    out
}

fn collect_defines(expr: &Expr, out: &mut HashSet<String>) {
    match &expr.kind {
        ExprKind::Call { op, args } => {
            if op.symbol_name() == Some("def") {
                if let Some(name) = def_target(args) {
                    out.insert(name.to_string());
                }
            }
            collect_defines(op, out);
            for a in args {
                collect_defines(a, out);
            }
        }
        ExprKind::List(items) => {
            for i in items {
                collect_defines(i, out);
            }
        }
        ExprKind::Pair { value: Some(v), .. } => collect_defines(v, out),
        ExprKind::Pipe(stages) => {
            for s in stages {
                collect_defines(s, out);
            }
        }
        _ => {}
    }
}

/// The symbol a `(def …)` call binds, if statically visible.
fn def_target(args: &[Expr]) -> Option<&str> {
    match args.first().map(|a| &a.kind) {
        Some(ExprKind::Pair { .. }) => args.iter().find_map(|a| match &a.kind {
            ExprKind::Pair { key, value: Some(v) } if key == "name" => v.symbol_name(),
            _ => None,
        }),
        _ => args.first().and_then(|a| a.symbol_name()),
    }
}

/// Free symbols read by the expression: excludes `bound`, builtins, the
/// caret placeholder, def targets, lambda parameters and for iterators.
pub fn free_symbols(expr: &Expr, bound: &HashSet<String>) -> HashSet<String> {
    let mut out = HashSet::new();
    collect_uses(expr, bound, &mut out);
    out
}

fn collect_uses(expr: &Expr, bound: &HashSet<String>, out: &mut HashSet<String>) {
    match &expr.kind {
        ExprKind::Symbol(s) => {
            if s != "^" && !bound.contains(s) && !is_builtin(s) {
                out.insert(s.clone());
            }
        }
        ExprKind::Pair { value: Some(v), .. } => collect_uses(v, bound, out),
        ExprKind::List(items) => {
            for i in items {
                collect_uses(i, bound, out);
            }
        }
        ExprKind::Pipe(stages) => {
            for s in stages {
                collect_uses(s, bound, out);
            }
        }
        ExprKind::Quoted(_) | ExprKind::Injected(_) => {}
        ExprKind::Call { op, args } => match op.symbol_name() {
            Some("def") => {
                let target = def_target(args);
                for a in args {
                    // the bound name itself is a write, not a read
                    match &a.kind {
                        ExprKind::Symbol(s) if Some(s.as_str()) == target => {}
                        ExprKind::Pair { key, value: Some(v) } if key == "name" => {
                            if v.symbol_name() != target {
                                collect_uses(v, bound, out);
                            }
                        }
                        _ => collect_uses(a, bound, out),
                    }
                }
            }
            Some("lambda") => collect_lambda_uses(args, bound, out),
            Some("for") => collect_for_uses(args, bound, out),
            _ => {
                collect_uses(op, bound, out);
                for a in args {
                    collect_uses(a, bound, out);
                }
            }
        },
        _ => {}
    }
}

pub(crate) fn arg_by<'a>(args: &'a [Expr], position: usize, name: &str) -> Option<&'a Expr> {
    if matches!(args.first().map(|a| &a.kind), Some(ExprKind::Pair { .. })) {
        args.iter().find_map(|a| match &a.kind {
            ExprKind::Pair { key, value: Some(v) } if key == name => Some(v.as_ref()),
            _ => None,
        })
    } else {
        args.get(position)
    }
}

fn collect_lambda_uses(args: &[Expr], bound: &HashSet<String>, out: &mut HashSet<String>) {
    let params = arg_by(args, 0, "params");
    let body = arg_by(args, 1, "body");
    let mut inner = bound.clone();
    if let Some(Expr { kind: ExprKind::List(items), .. }) = params {
        for item in items {
            if let ExprKind::Pair { key, value } = &item.kind {
                // defaults evaluate in the defining scope
                if let Some(v) = value {
                    collect_uses(v, bound, out);
                }
                inner.insert(key.clone());
            }
        }
    } else if let Some(p) = params {
        collect_uses(p, bound, out);
    }
    if let Some(b) = body {
        collect_uses(b, &inner, out);
    }
}

fn collect_for_uses(args: &[Expr], bound: &HashSet<String>, out: &mut HashSet<String>) {
    let coll = arg_by(args, 0, "coll");
    let iterator = arg_by(args, 1, "iterator");
    let body = arg_by(args, 2, "body");
    if let Some(c) = coll {
        collect_uses(c, bound, out);
    }
    let mut inner = bound.clone();
    match iterator.map(|e| &e.kind) {
        Some(ExprKind::Symbol(s)) => {
            inner.insert(s.clone());
        }
        Some(_) => {
            if let Some(i) = iterator {
                collect_uses(i, bound, out);
            }
        }
        None => {}
    }
    if let Some(b) = body {
        collect_uses(b, &inner, out);
    }
}

/// Evaluate `program` honoring the dependency graph, up to `interp.jobs`
/// forms in flight. Returns the last form's value. After the first failure
/// no new form starts; in-flight forms finish; the earliest failing form (in
/// program order) supplies the reported error.
pub fn run_concurrent(interp: &Interp, program: &[Expr], env: &Env) -> Result<PelValue> {
    let n = program.len();
    if n == 0 {
        return Ok(PelValue::Nil);
    }
    let graph = analyze(program);
    let jobs = interp.jobs.max(1);
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(i, j) in &graph.edges {
        indeg[j] += 1;
        succ[i].push(j);
    }

    let started_at = Instant::now();
    let record = |form: usize, what: TraceKind| {
        if let Some(log) = &interp.trace {
            log.lock().unwrap().push(TraceEvent { form, what, at_micros: started_at.elapsed().as_micros() });
        }
    };

    let mut results: Vec<Option<Result<PelValue>>> = (0..n).map(|_| None).collect();
    let (tx, rx) = mpsc::channel::<(usize, Result<PelValue>)>();
    std::thread::scope(|scope| {
        let mut started = vec![false; n];
        let mut running = 0usize;
        let mut failed = false;
        loop {
            if !failed {
                for i in 0..n {
                    if !started[i] && indeg[i] == 0 && running < jobs {
                        started[i] = true;
                        running += 1;
                        let tx = tx.clone();
                        let form = &program[i];
                        let record = &record;
                        std::thread::Builder::new()
                            .name(format!("pel-form-{i}"))
                            .stack_size(8 * 1024 * 1024)
                            .spawn_scoped(scope, move || {
                                record(i, TraceKind::Start);
                                let res = eval(interp, form, env);
                                record(i, TraceKind::Finish);
                                let _ = tx.send((i, res));
                            })
                            .expect("spawning a scoped worker cannot fail");
                    }
                }
            }
            if running == 0 {
                break;
            }
            let (i, res) = rx.recv().expect("workers outlive the channel");
            running -= 1;
            if res.is_err() {
                failed = true;
            } else {
                for &j in &succ[i] {
                    indeg[j] -= 1;
                }
            }
            results[i] = Some(res);
        }
    });

    for (i, slot) in results.iter_mut().enumerate() {
        if matches!(slot, Some(Err(_))) {
            if let Some(Err(mut e)) = slot.take() {
                e.form_index = Some(i);
                return Err(e);
            }
        }
    }
    results[n - 1].take().expect("no error means every form ran")
}

/// `do/async` entry point: the listed expressions are scheduled exactly like
/// top-level forms.
pub fn run_exprs_concurrent(interp: &Interp, exprs: &[Expr], env: &Env) -> Result<PelValue> {
    run_concurrent(interp, exprs, env)
}
