//! The standard library. Every builtin carries a docstring; the REPL shows
//! it as error context when a call goes wrong, and the self-heal prompt
//! feeds it to the helper backend.
//!
//! Strictness: arithmetic, comparisons, strings, print, summarize and
//! meeting are strict. def, lambda, if, case, for, do and do/async are
//! non-strict and receive raw expressions.
//!
//! There is intentionally no `add`: string concatenation is `concat`, and
//! numeric addition is `+`. Calling `add` is the canonical unbound-symbol
//! mistake the self-healer fixes.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ast::ExprKind;
use crate::closure::{ArgValue, ClosureBody, Param, ParamDefault, PelClosure};
use crate::doc::{DocParam, Docstring};
use crate::env::Env;
use crate::error::{ErrorKind, PelError, Result};
use crate::eval::{eval, pipe_value_through, BuiltinFn, FiredCall, Interp};
use crate::num::PelNum;
use crate::value::PelValue;

/// Names installed in the global frame, in registration order. The scheduler
/// and the grammar exporter treat these as always-bound.
pub const BUILTIN_NAMES: &[&str] = &[
    "+", "-", "*", "/", "pow", "sqrt", "len", "gt", "lt", "eq", "concat", "print", "def",
    "lambda", "if", "case", "for", "do", "do/async", "summarize", "meeting",
];

pub fn is_builtin(name: &str) -> bool {
    BUILTIN_NAMES.contains(&name)
}

fn req(name: &str) -> Param {
    Param { name: name.into(), default: None }
}

fn opt(name: &str, default: PelValue) -> Param {
    Param { name: name.into(), default: Some(ParamDefault::Value(default)) }
}

fn doc(signature: &str, params: &[(&str, &str, &str)], description: &str, example: &str) -> Docstring {
    Docstring {
        signature: signature.into(),
        params: params
            .iter()
            .map(|(name, ty, note)| DocParam { name: (*name).into(), ty: (*ty).into(), note: (*note).into() })
            .collect(),
        description: description.into(),
        example: example.into(),
    }
}

fn register(env: &Env, name: &str, strict: bool, params: Vec<Param>, docstring: Docstring, f: BuiltinFn) {
    let closure = PelClosure {
        name: Some(name.to_string()),
        strict,
        spec: Arc::new(crate::closure::ArgSpec { params }),
        bound: HashMap::new(),
        env: env.clone(),
        body: ClosureBody::Builtin(f),
        doc: Some(Arc::new(docstring)),
        tag: None,
    };
    env.define_protected(name, PelValue::Closure(Arc::new(closure)));
}

/// Install the whole standard library into `env` (the global frame).
pub fn install(env: &Env) {
    register(
        env,
        "+",
        true,
        vec![req("x"), opt("y", PelValue::Nil)],
        doc(
            "(+ :x :y #nil)",
            &[
                ("x", "PelNum or PelListLiteral", "left operand, or a list of numbers to sum when y is omitted"),
                ("y", "PelNum (optional)", "right operand"),
            ],
            "Adds two numbers. With a single list argument, sums the list (an empty list sums to 0).",
            "(+ 2 3) ; => 5\n([1 2 3] ▷ (+)) ; => 6",
        ),
        bi_add,
    );
    register(
        env,
        "-",
        true,
        vec![req("x"), opt("y", PelValue::Nil)],
        doc(
            "(- :x :y #nil)",
            &[("x", "PelNum", "minuend"), ("y", "PelNum", "subtrahend")],
            "Subtracts y from x. Both arguments must be numbers.",
            "(- 10 4) ; => 6",
        ),
        bi_sub,
    );
    register(
        env,
        "*",
        true,
        vec![req("x"), opt("y", PelValue::Nil)],
        doc(
            "(* :x :y #nil)",
            &[
                ("x", "PelNum or PelListLiteral", "left operand, or a list of numbers to multiply when y is omitted"),
                ("y", "PelNum (optional)", "right operand"),
            ],
            "Multiplies two numbers. With a single list argument, multiplies the list (an empty list yields 1).",
            "(* 10 5) ; => 50",
        ),
        bi_mul,
    );
    register(
        env,
        "/",
        true,
        vec![req("x"), opt("y", PelValue::Nil)],
        doc(
            "(/ :x :y #nil)",
            &[("x", "PelNum", "dividend"), ("y", "PelNum", "divisor")],
            "Divides x by y. Division by zero is an error.",
            "(/ 10 4) ; => 2.5",
        ),
        bi_div,
    );
    register(
        env,
        "pow",
        true,
        vec![req("x"), req("y")],
        doc(
            "(pow :x :y)",
            &[("x", "PelNum", "base"), ("y", "PelNum", "exponent")],
            "Raises x to the power y. The result is a decimal number.",
            "(pow 3 2) ; => 9",
        ),
        bi_pow,
    );
    register(
        env,
        "sqrt",
        true,
        vec![req("x")],
        doc(
            "(sqrt :x)",
            &[("x", "PelNum", "a non-negative number")],
            "Returns the square root of x as a decimal number.",
            "(sqrt 25) ; => 5",
        ),
        bi_sqrt,
    );
    register(
        env,
        "len",
        true,
        vec![req("x")],
        doc(
            "(len :x)",
            &[("x", "PelListLiteral or PelString", "the collection to measure")],
            "Returns the number of elements in a list, or the number of characters in a string.",
            "(len [1 2 3 4]) ; => 4",
        ),
        bi_len,
    );
    register(
        env,
        "gt",
        true,
        vec![req("x"), req("y")],
        doc(
            "(gt :x :y)",
            &[("x", "PelNum", "left operand"), ("y", "PelNum", "right operand")],
            "Returns #t when x is strictly greater than y.",
            "(gt 3 2) ; => #t",
        ),
        bi_gt,
    );
    register(
        env,
        "lt",
        true,
        vec![req("x"), req("y")],
        doc(
            "(lt :x :y)",
            &[("x", "PelNum", "left operand"), ("y", "PelNum", "right operand")],
            "Returns #t when x is strictly less than y.",
            "(lt 2 3) ; => #t",
        ),
        bi_lt,
    );
    register(
        env,
        "eq",
        true,
        vec![req("x"), req("y")],
        doc(
            "(eq :x :y)",
            &[("x", "PelValue", "any value"), ("y", "PelValue", "any value")],
            "Structural equality for all values; closures compare by identity.",
            "(eq [1 2] [1 2]) ; => #t",
        ),
        bi_eq,
    );
    register(
        env,
        "concat",
        true,
        vec![req("x"), req("y")],
        doc(
            "(concat :x :y)",
            &[("x", "PelString", "first string"), ("y", "PelString", "second string")],
            "Concatenates two strings. This is the way to join strings in Pel; there is no `add`.",
            "(concat \"hello, \" \"world\") ; => \"hello, world\"",
        ),
        bi_concat,
    );
    register(
        env,
        "print",
        true,
        vec![req("vals"), opt("sep", PelValue::str("")), opt("nl", PelValue::Bool(true))],
        doc(
            "(print :vals :sep \"\" :nl #t)",
            &[
                ("vals", "PelValue", "values to print, can be a single value or a literal list"),
                ("sep", "PelString (optional)", "separator string, default \"\""),
                ("nl", "PelBool (optional)", "whether to end with a newline, default #t"),
            ],
            "Prints values to stdout. If vals is a bracket-literal, prints each item.\nOptionally separates with the given separator string and adds a newline.\nReturns the input vals unchanged.",
            "(print :vals [\"hello\" \"world\"] :sep \" \") ; prints: hello world",
        ),
        bi_print,
    );
    register(
        env,
        "def",
        false,
        vec![req("name"), req("value")],
        doc(
            "(def :name :value)",
            &[
                ("name", "PelSymbol", "the symbol to bind; received unevaluated"),
                ("value", "PelValue", "the value to bind it to"),
            ],
            "Evaluates value, binds it to name in the current environment, and returns it.\nBuiltin names cannot be redefined.",
            "(def pi 3.14) ; => 3.14\n(lambda [:x] x) ▷ (def id ^)",
        ),
        bi_def,
    );
    register(
        env,
        "lambda",
        false,
        vec![req("params"), req("body")],
        doc(
            "(lambda :params :body)",
            &[
                ("params", "PelListLiteral", "parameter keys, each optionally followed by a default value"),
                ("body", "PelValue", "the expression evaluated when the closure fires"),
            ],
            "Creates a strict closure capturing the current environment.\nA key followed by a value makes that parameter optional: (lambda [:x :y 10] ...) defaults y to 10.",
            "(def add (lambda [:x :y] (+ x y)))\n(add 2 3) ; => 5",
        ),
        bi_lambda,
    );
    register(
        env,
        "if",
        false,
        vec![req("cond"), req("then"), opt("else", PelValue::Nil)],
        doc(
            "(if :cond :then :else #nil)",
            &[
                ("cond", "PelBool", "must evaluate to #t or #f; nil has no truthiness"),
                ("then", "PelValue", "evaluated only when cond is #t"),
                ("else", "PelValue (optional)", "evaluated only when cond is #f, default #nil"),
            ],
            "Evaluates cond, then exactly one branch. The other branch is never evaluated.",
            "(if (gt 3 2) \"yes\" \"no\") ; => \"yes\"",
        ),
        bi_if,
    );
    register(
        env,
        "case",
        false,
        vec![req("scrut"), req("body")],
        doc(
            "(case :scrut :body)",
            &[
                ("scrut", "PelValue", "the value under scrutiny; piped into each condition"),
                ("body", "PelListLiteral", "alternating condition/consequence elements"),
            ],
            "Tries conditions in order and returns the first matching consequence.\nA literal #t matches unconditionally. A string condition is judged by the language model against scrut.\nAny other condition is a pipe target: the scrut is piped into it and the result must be a boolean.\nReturns #nil when nothing matches.",
            "(case my-list [\n  (len) ▷ (gt 5) \"long\"\n  #t \"short\"\n])",
        ),
        bi_case,
    );
    register(
        env,
        "for",
        false,
        vec![req("coll"), req("iterator"), req("body")],
        doc(
            "(for :coll :iterator :body)",
            &[
                ("coll", "PelListLiteral", "the list to iterate over"),
                ("iterator", "PelSymbol", "bound to each element in turn; received unevaluated"),
                ("body", "PelValue", "evaluated once per element in a fresh scope"),
            ],
            "Maps body over coll and returns the list of results, same length as coll.",
            "(for :coll [1 2 3] :iterator i :body (* i 2)) ; => [2 4 6]",
        ),
        bi_for,
    );
    register(
        env,
        "do",
        false,
        vec![req("body")],
        doc(
            "(do :body)",
            &[("body", "PelListLiteral", "expressions to evaluate in order")],
            "Evaluates each expression in sequence and returns the last value.\n(do a b c) and (do [a b c]) are the same form.",
            "(do [(print \"Starting...\") (def x 5) (+ x 10)]) ; => 15",
        ),
        bi_do,
    );
    register(
        env,
        "do/async",
        false,
        vec![req("body")],
        doc(
            "(do/async :body)",
            &[("body", "PelListLiteral", "expressions to evaluate concurrently")],
            "Like do, but independent expressions run concurrently.\nReturns the last listed expression's value after all have completed.",
            "(do/async [(slow-a) (slow-b) (+ 1 2)]) ; => 3",
        ),
        bi_do_async,
    );
    register(
        env,
        "summarize",
        true,
        vec![req("text")],
        doc(
            "(summarize :text)",
            &[("text", "PelString", "nonempty text to summarize")],
            "Asks the language model backend for a summary of the text.",
            "(meeting :group agents :rounds 3 :topic t) ▷ (summarize)",
        ),
        bi_summarize,
    );
    register(
        env,
        "meeting",
        true,
        vec![req("group"), req("rounds"), req("topic"), opt("context", PelValue::Nil)],
        doc(
            "(meeting :group :rounds :topic :context #nil)",
            &[
                ("group", "PelListLiteral", "agent paths participating, in speaking order"),
                ("rounds", "PelNum", "number of rounds; every participant speaks once per round"),
                ("topic", "PelString", "what the meeting is about"),
                ("context", "PelValue (optional)", "extra material shown to every speaker"),
            ],
            "Simulates a discussion between registered agents and returns the transcript\nas text, one \"SPEAKER: utterance\" line per turn.",
            "(meeting :group [\"HQ/FIN\" \"HQ/SALES\"] :rounds 3 :topic \"budget\") ▷ (summarize)",
        ),
        bi_meeting,
    );
}

fn num_arg(interp: &Interp, call: &FiredCall, i: usize, param: &str) -> Result<PelNum> {
    match call.value(interp, i)? {
        PelValue::Num(n) => Ok(n),
        other => Err(PelError::new(
            ErrorKind::TypeMismatch,
            format!(":{param} must be a number, got {}", other.type_name()),
        )),
    }
}

fn str_arg(interp: &Interp, call: &FiredCall, i: usize, param: &str) -> Result<String> {
    match call.value(interp, i)? {
        PelValue::Str(s) => Ok(s),
        other => Err(PelError::new(
            ErrorKind::TypeMismatch,
            format!(":{param} must be a string, got {}", other.type_name()),
        )),
    }
}

/// Fold a list of numbers with `op`, starting from `unit`.
fn reduce_nums(
    items: &[PelValue],
    unit: PelNum,
    op: fn(PelNum, PelNum) -> PelNum,
    what: &str,
) -> Result<PelValue> {
    let mut acc = unit;
    for item in items {
        match item {
            PelValue::Num(n) => acc = op(acc, *n),
            other => {
                return Err(PelError::new(
                    ErrorKind::TypeMismatch,
                    format!("{what} over a list needs numeric elements, got {}", other.type_name()),
                ));
            }
        }
    }
    Ok(PelValue::Num(acc))
}

fn bi_add(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let x = call.value(interp, 0)?;
    let y = call.value(interp, 1)?;
    match (x, y) {
        (PelValue::List(items), PelValue::Nil) => reduce_nums(&items, PelNum::Int(0), PelNum::add, "+"),
        (PelValue::Num(a), PelValue::Num(b)) => Ok(PelValue::Num(a.add(b))),
        (x, y) => Err(arith_mismatch("+", &x, &y)),
    }
}

fn bi_mul(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let x = call.value(interp, 0)?;
    let y = call.value(interp, 1)?;
    match (x, y) {
        (PelValue::List(items), PelValue::Nil) => reduce_nums(&items, PelNum::Int(1), PelNum::mul, "*"),
        (PelValue::Num(a), PelValue::Num(b)) => Ok(PelValue::Num(a.mul(b))),
        (x, y) => Err(arith_mismatch("*", &x, &y)),
    }
}

fn bi_sub(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let a = num_arg(interp, call, 0, "x")?;
    let b = num_arg(interp, call, 1, "y")?;
    Ok(PelValue::Num(a.sub(b)))
}

fn bi_div(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let a = num_arg(interp, call, 0, "x")?;
    let b = num_arg(interp, call, 1, "y")?;
    Ok(PelValue::Num(a.div(b)?))
}

fn arith_mismatch(op: &str, x: &PelValue, y: &PelValue) -> PelError {
    PelError::new(
        ErrorKind::TypeMismatch,
        format!("{op} expects two numbers (or a single list), got {} and {}", x.type_name(), y.type_name()),
    )
}

fn bi_pow(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let a = num_arg(interp, call, 0, "x")?;
    let b = num_arg(interp, call, 1, "y")?;
    Ok(PelValue::Num(a.pow(b)))
}

fn bi_sqrt(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let a = num_arg(interp, call, 0, "x")?;
    Ok(PelValue::Num(a.sqrt()?))
}

fn bi_len(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    match call.value(interp, 0)? {
        PelValue::List(items) => Ok(PelValue::int(items.len() as i64)),
        PelValue::Str(s) => Ok(PelValue::int(s.chars().count() as i64)),
        other => Err(PelError::new(
            ErrorKind::TypeMismatch,
            format!("len takes a list or a string, got {}", other.type_name()),
        )),
    }
}

fn bi_gt(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let a = num_arg(interp, call, 0, "x")?;
    let b = num_arg(interp, call, 1, "y")?;
    Ok(PelValue::Bool(a.compare(b)? == std::cmp::Ordering::Greater))
}

fn bi_lt(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let a = num_arg(interp, call, 0, "x")?;
    let b = num_arg(interp, call, 1, "y")?;
    Ok(PelValue::Bool(a.compare(b)? == std::cmp::Ordering::Less))
}

fn bi_eq(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let a = call.value(interp, 0)?;
    let b = call.value(interp, 1)?;
    Ok(PelValue::Bool(a == b))
}

fn bi_concat(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let a = str_arg(interp, call, 0, "x")?;
    let b = str_arg(interp, call, 1, "y")?;
    Ok(PelValue::Str(format!("{a}{b}")))
}

fn bi_print(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let vals = call.value(interp, 0)?;
    let sep = str_arg(interp, call, 1, "sep")?;
    let nl = match call.value(interp, 2)? {
        PelValue::Bool(b) => b,
        other => {
            return Err(PelError::new(
                ErrorKind::TypeMismatch,
                format!(":nl must be a boolean, got {}", other.type_name()),
            ));
        }
    };
    let text = match &vals {
        PelValue::List(items) => {
            items.iter().map(PelValue::print_form).collect::<Vec<_>>().join(&sep)
        }
        single => single.print_form(),
    };
    interp.output.write_str(&text);
    if nl {
        interp.output.write_str("\n");
    }
    Ok(vals)
}

fn raw_thunk<'a>(call: &'a FiredCall, i: usize) -> Option<(&'a crate::ast::Expr, &'a Env)> {
    match call.arg(i) {
        ArgValue::Thunk { expr, env } => Some((expr, env)),
        ArgValue::Value(_) => None,
    }
}

fn bi_def(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let (name, target) = match raw_thunk(call, 0) {
        Some((expr, env)) => match &expr.kind {
            ExprKind::Symbol(s) => (s.clone(), env.clone()),
            other => {
                return Err(PelError::new(
                    ErrorKind::DefTargetNotSymbol,
                    format!("def needs a symbol to bind, got {}", kind_name(other)),
                ));
            }
        },
        None => {
            return Err(PelError::new(
                ErrorKind::DefTargetNotSymbol,
                "def needs a symbol to bind, got an evaluated value",
            ));
        }
    };
    let mut value = call.value(interp, 1)?;
    // a def'd anonymous closure takes on the binding's name
    if let PelValue::Closure(c) = &value {
        if c.name.is_none() {
            value = PelValue::Closure(Arc::new(PelClosure { name: Some(name.clone()), ..(**c).clone() }));
        }
    }
    target.define(&name, value)
}

fn kind_name(kind: &ExprKind) -> &'static str {
    match kind {
        ExprKind::Num(_) => "a number",
        ExprKind::Str(_) => "a string",
        ExprKind::Bool(_) => "a boolean",
        ExprKind::Nil => "#nil",
        ExprKind::Key(_) => "a key",
        ExprKind::Symbol(_) => "a symbol",
        ExprKind::Pair { .. } => "a pair",
        ExprKind::Call { .. } => "a call",
        ExprKind::List(_) => "a literal list",
        ExprKind::Quoted(_) => "a quoted expression",
        ExprKind::Pipe(_) => "a pipe chain",
        ExprKind::Injected(_) => "an evaluated value",
    }
}

fn bi_lambda(_interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let Some((params_expr, _)) = raw_thunk(call, 0) else {
        return Err(PelError::new(ErrorKind::BadParamSpec, "lambda parameters must be a literal list of keys"));
    };
    let ExprKind::List(items) = &params_expr.kind else {
        return Err(PelError::new(
            ErrorKind::BadParamSpec,
            format!("lambda parameters must be a literal list, got {}", kind_name(&params_expr.kind)),
        ));
    };
    let mut params = Vec::with_capacity(items.len());
    for item in items {
        match &item.kind {
            ExprKind::Pair { key, value } => {
                if params.iter().any(|p: &Param| p.name == *key) {
                    return Err(PelError::new(
                        ErrorKind::BadParamSpec,
                        format!("duplicate parameter :{key}"),
                    )
                    .with_span(item.span));
                }
                params.push(Param {
                    name: key.clone(),
                    default: value.as_ref().map(|e| ParamDefault::Expr(Arc::new((**e).clone()))),
                });
            }
            other => {
                return Err(PelError::new(
                    ErrorKind::BadParamSpec,
                    format!("lambda parameters must be keys like [:x :y 10], got {}", kind_name(other)),
                )
                .with_span(item.span));
            }
        }
    }
    let Some((body, body_env)) = raw_thunk(call, 1) else {
        return Err(PelError::new(ErrorKind::BadParamSpec, "lambda body must be an expression"));
    };
    Ok(PelValue::Closure(Arc::new(PelClosure {
        name: None,
        strict: true,
        spec: Arc::new(crate::closure::ArgSpec { params }),
        bound: HashMap::new(),
        env: body_env.clone(),
        body: ClosureBody::User { body: Arc::new(body.clone()) },
        doc: None,
        tag: None,
    })))
}

fn require_bool(v: PelValue) -> Result<bool> {
    match v {
        PelValue::Bool(b) => Ok(b),
        PelValue::Nil => Err(PelError::new(
            ErrorKind::ConditionNotBool,
            "condition evaluated to #nil, whose truthiness is undefined; expected #t or #f",
        )),
        other => Err(PelError::new(
            ErrorKind::ConditionNotBool,
            format!("condition must evaluate to #t or #f, got {}", other.type_name()),
        )),
    }
}

fn bi_if(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let cond = require_bool(call.value(interp, 0)?)?;
    if cond {
        call.value(interp, 1)
    } else {
        call.value(interp, 2)
    }
}

fn bi_case(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let scrut = call.value(interp, 0)?;
    let Some((body, env)) = raw_thunk(call, 1) else {
        return Err(PelError::new(ErrorKind::TypeMismatch, "case body must be a literal list"));
    };
    let ExprKind::List(items) = &body.kind else {
        return Err(PelError::new(
            ErrorKind::TypeMismatch,
            format!("case body must be a literal list, got {}", kind_name(&body.kind)),
        ));
    };
    if items.len() % 2 != 0 {
        return Err(PelError::new(
            ErrorKind::OddCaseBody,
            format!("case body needs condition/consequence pairs, got {} elements", items.len()),
        )
        .with_span(body.span));
    }
    for branch in items.chunks(2) {
        let (cond, consequence) = (&branch[0], &branch[1]);
        let matched = match &cond.kind {
            ExprKind::Bool(true) => true,
            ExprKind::Str(s) => {
                crate::llm::eval_condition(interp.backend.as_ref(), &scrut.to_string(), s)
                    .map_err(|e| e.or_span(cond.span))?
            }
            _ => require_bool(pipe_value_through(interp, scrut.clone(), cond.span, cond, env)?)
                .map_err(|e| e.or_span(cond.span))?,
        };
        if matched {
            return eval(interp, consequence, env);
        }
    }
    Ok(PelValue::Nil)
}

fn bi_for(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let coll = match call.value(interp, 0)? {
        PelValue::List(items) => items,
        other => {
            return Err(PelError::new(
                ErrorKind::IterTargetNotList,
                format!("for iterates over a list, got {}", other.type_name()),
            ));
        }
    };
    let name = match raw_thunk(call, 1) {
        Some((expr, _)) => match &expr.kind {
            ExprKind::Symbol(s) => s.clone(),
            other => {
                return Err(PelError::new(
                    ErrorKind::IteratorNotSymbol,
                    format!("the iterator must be a symbol, got {}", kind_name(other)),
                ));
            }
        },
        None => {
            return Err(PelError::new(
                ErrorKind::IteratorNotSymbol,
                "the iterator must be a symbol, got an evaluated value",
            ));
        }
    };
    let Some((body, body_env)) = raw_thunk(call, 2) else {
        return Err(PelError::new(ErrorKind::TypeMismatch, "for body must be an expression"));
    };
    let mut out = Vec::with_capacity(coll.len());
    for item in coll {
        let frame = body_env.child();
        frame.define(&name, item)?;
        out.push(eval(interp, body, &frame)?);
    }
    Ok(PelValue::List(out))
}

fn body_list<'a>(call: &'a FiredCall, what: &str) -> Result<(&'a [crate::ast::Expr], &'a Env)> {
    let Some((body, env)) = raw_thunk(call, 0) else {
        return Err(PelError::new(
            ErrorKind::TypeMismatch,
            format!("{what} expects a literal list of expressions"),
        ));
    };
    match &body.kind {
        ExprKind::List(items) => Ok((items, env)),
        other => Err(PelError::new(
            ErrorKind::TypeMismatch,
            format!("{what} expects a literal list of expressions, got {}", kind_name(other)),
        )
        .with_span(body.span)),
    }
}

fn bi_do(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let (items, env) = body_list(call, "do")?;
    let mut last = PelValue::Nil;
    for item in items {
        last = eval(interp, item, env)?;
    }
    Ok(last)
}

fn bi_do_async(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let (items, env) = body_list(call, "do/async")?;
    crate::scheduler::run_exprs_concurrent(interp, items, env)
}

fn bi_summarize(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let text = str_arg(interp, call, 0, "text")?;
    if text.is_empty() {
        return Err(PelError::new(ErrorKind::BackendError, "empty input"));
    }
    crate::llm::summarize_text(interp.backend.as_ref(), &text).map(PelValue::Str)
}

fn bi_meeting(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let group = match call.value(interp, 0)? {
        PelValue::List(items) => {
            let mut paths = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    PelValue::Str(s) => paths.push(s),
                    other => {
                        return Err(PelError::new(
                            ErrorKind::TypeMismatch,
                            format!(":group must be a list of agent path strings, got {}", other.type_name()),
                        ));
                    }
                }
            }
            paths
        }
        other => {
            return Err(PelError::new(
                ErrorKind::TypeMismatch,
                format!(":group must be a list of agent path strings, got {}", other.type_name()),
            ));
        }
    };
    if group.is_empty() {
        return Err(PelError::new(ErrorKind::TypeMismatch, ":group must name at least one agent"));
    }
    let rounds = match num_arg(interp, call, 1, "rounds")?.as_index() {
        Some(n) if n >= 1 => n as usize,
        _ => return Err(PelError::new(ErrorKind::TypeMismatch, ":rounds must be an integer of at least 1")),
    };
    let topic = str_arg(interp, call, 2, "topic")?;
    let context = call.value(interp, 3)?;
    crate::agents::run_meeting(interp, &group, rounds, &topic, &context).map(PelValue::Str)
}
