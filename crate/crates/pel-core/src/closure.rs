//! Closures and the argument-merging rules behind automatic partial
//! application. A call either fires (every parameter without a default is
//! bound) or returns a new closure carrying the bindings so far; supplying
//! too few arguments is never an error.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ast::Expr;
use crate::doc::Docstring;
use crate::env::Env;
use crate::error::{ErrorKind, PelError, Result};
use crate::value::PelValue;

/// An argument as a callee sees it. Strict closures always receive `Value`s;
/// non-strict builtins receive `Thunk`s that remember the environment the
/// expression was written in.
#[derive(Debug, Clone)]
pub enum ArgValue {
    Value(PelValue),
    Thunk { expr: Arc<Expr>, env: Env },
}

#[derive(Debug, Clone)]
pub enum ParamDefault {
    Value(PelValue),
    /// Lambda defaults are expressions, evaluated at fire time in the
    /// closure's defining environment.
    Expr(Arc<Expr>),
}

#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub default: Option<ParamDefault>,
}

#[derive(Debug, Clone)]
pub struct ArgSpec {
    pub params: Vec<Param>,
}

impl ArgSpec {
    pub fn new(params: Vec<Param>) -> ArgSpec {
        ArgSpec { params }
    }

    pub fn has_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p.name == name)
    }
}

/// How a saturated call is executed.
#[derive(Clone)]
pub enum ClosureBody {
    Builtin(crate::eval::BuiltinFn),
    User { body: Arc<Expr> },
}

impl std::fmt::Debug for ClosureBody {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClosureBody::Builtin(_) => f.write_str("Builtin"),
            ClosureBody::User { .. } => f.write_str("User"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PelClosure {
    pub name: Option<String>,
    pub strict: bool,
    pub spec: Arc<ArgSpec>,
    /// Arguments already supplied by earlier (partial) applications.
    pub bound: HashMap<String, ArgValue>,
    pub env: Env,
    pub body: ClosureBody,
    pub doc: Option<Arc<Docstring>>,
    /// Extra dispatch data; agent closures carry their org path here.
    pub tag: Option<String>,
}

/// Arguments of one call site. Mixing the two shapes is rejected before this
/// type is built.
#[derive(Debug, Clone)]
pub enum CallArguments {
    Positional(Vec<ArgValue>),
    Named(Vec<(String, ArgValue)>),
}

/// Result of merging call arguments into a closure.
#[derive(Debug)]
pub enum MergeOutcome {
    Partial(PelClosure),
    /// Ready to fire: one slot per parameter, in declaration order; `None`
    /// means "use the default".
    Fire(Vec<Option<ArgValue>>),
}

impl PelClosure {
    /// Parameters not yet bound, in declaration order.
    pub fn unbound_params(&self) -> Vec<&Param> {
        self.spec.params.iter().filter(|p| !self.bound.contains_key(&p.name)).collect()
    }

    pub fn remaining_arity(&self) -> usize {
        self.unbound_params().len()
    }

    /// Merge one call's arguments into this closure's bindings.
    ///
    /// Positional arguments fill the unbound parameters in declaration
    /// order. Named arguments bind by name; an unknown name or one already
    /// bound is an error. If any parameter without a default is still
    /// missing afterwards the outcome is a partial closure.
    pub fn merge_args(&self, args: CallArguments) -> Result<MergeOutcome> {
        let mut bound = self.bound.clone();
        match args {
            CallArguments::Positional(vals) => {
                let open: Vec<String> =
                    self.unbound_params().iter().map(|p| p.name.clone()).collect();
                if vals.len() > open.len() {
                    return Err(PelError::new(
                        ErrorKind::TooManyArguments,
                        format!(
                            "{} takes at most {} more argument{}, got {}",
                            self.describe(),
                            open.len(),
                            if open.len() == 1 { "" } else { "s" },
                            vals.len()
                        ),
                    ));
                }
                for (name, v) in open.into_iter().zip(vals) {
                    bound.insert(name, v);
                }
            }
            CallArguments::Named(pairs) => {
                for (name, v) in pairs {
                    if !self.spec.has_param(&name) {
                        return Err(PelError::new(
                            ErrorKind::UnknownNamedArgument,
                            format!("{} has no argument named :{name}", self.describe()),
                        ));
                    }
                    if bound.contains_key(&name) {
                        return Err(PelError::new(
                            ErrorKind::DuplicateArgument,
                            format!("argument :{name} is already bound in {}", self.describe()),
                        ));
                    }
                    bound.insert(name, v);
                }
            }
        }

        let missing_required = self
            .spec
            .params
            .iter()
            .any(|p| p.default.is_none() && !bound.contains_key(&p.name));
        if missing_required {
            let mut partial = self.clone();
            partial.bound = bound;
            return Ok(MergeOutcome::Partial(partial));
        }

        let slots = self.spec.params.iter().map(|p| bound.remove(&p.name)).collect();
        Ok(MergeOutcome::Fire(slots))
    }

    fn describe(&self) -> String {
        match &self.name {
            Some(n) => format!("`{n}`"),
            None => "this closure".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::Span;

    fn spec(names: &[&str], defaults: &[(&str, PelValue)]) -> Arc<ArgSpec> {
        Arc::new(ArgSpec::new(
            names
                .iter()
                .map(|n| Param {
                    name: n.to_string(),
                    default: defaults
                        .iter()
                        .find(|(dn, _)| dn == n)
                        .map(|(_, v)| ParamDefault::Value(v.clone())),
                })
                .collect(),
        ))
    }

    fn dummy(spec_: Arc<ArgSpec>) -> PelClosure {
        PelClosure {
            name: Some("f".into()),
            strict: true,
            spec: spec_,
            bound: HashMap::new(),
            env: Env::new(),
            body: ClosureBody::User {
                body: Arc::new(Expr::new(crate::ast::ExprKind::Nil, Span::default())),
            },
            doc: None,
            tag: None,
        }
    }

    fn val(i: i64) -> ArgValue {
        ArgValue::Value(PelValue::int(i))
    }

    #[test]
    fn under_application_yields_partial() {
        let c = dummy(spec(&["x", "y"], &[]));
        match c.merge_args(CallArguments::Positional(vec![val(5)])).unwrap() {
            MergeOutcome::Partial(p) => {
                assert_eq!(p.remaining_arity(), 1);
                assert!(p.bound.contains_key("x"));
            }
            MergeOutcome::Fire(_) => panic!("expected partial"),
        }
    }

    #[test]
    fn saturation_fires_in_param_order() {
        let c = dummy(spec(&["x", "y"], &[]));
        let partial = match c.merge_args(CallArguments::Positional(vec![val(5)])).unwrap() {
            MergeOutcome::Partial(p) => p,
            _ => panic!(),
        };
        match partial.merge_args(CallArguments::Positional(vec![val(10)])).unwrap() {
            MergeOutcome::Fire(slots) => {
                assert_eq!(slots.len(), 2);
                assert!(matches!(slots[0], Some(ArgValue::Value(PelValue::Num(_)))));
            }
            _ => panic!("expected fire"),
        }
    }

    #[test]
    fn defaults_leave_their_slot_empty() {
        let c = dummy(spec(&["x", "y"], &[("y", PelValue::int(10))]));
        match c.merge_args(CallArguments::Positional(vec![val(5)])).unwrap() {
            MergeOutcome::Fire(slots) => {
                assert!(slots[0].is_some());
                assert!(slots[1].is_none());
            }
            _ => panic!("defaulted param should not block firing"),
        }
    }

    #[test]
    fn named_binding_and_its_errors() {
        let c = dummy(spec(&["x", "y"], &[]));
        let p = match c.merge_args(CallArguments::Named(vec![("y".into(), val(1))])).unwrap() {
            MergeOutcome::Partial(p) => p,
            _ => panic!(),
        };
        let dup = p.merge_args(CallArguments::Named(vec![("y".into(), val(2))])).unwrap_err();
        assert_eq!(dup.kind, ErrorKind::DuplicateArgument);
        let unk = p.merge_args(CallArguments::Named(vec![("z".into(), val(2))])).unwrap_err();
        assert_eq!(unk.kind, ErrorKind::UnknownNamedArgument);
    }

    #[test]
    fn positional_overflow_counts_defaulted_slots() {
        let c = dummy(spec(&["x", "y"], &[("y", PelValue::int(10))]));
        assert!(matches!(
            c.merge_args(CallArguments::Positional(vec![val(1), val(2)])).unwrap(),
            MergeOutcome::Fire(_)
        ));
        let err = c.merge_args(CallArguments::Positional(vec![val(1), val(2), val(3)])).unwrap_err();
        assert_eq!(err.kind, ErrorKind::TooManyArguments);
    }

    #[test]
    fn empty_merge_is_a_structural_copy() {
        let c = dummy(spec(&["x", "y"], &[]));
        match c.merge_args(CallArguments::Positional(vec![])).unwrap() {
            MergeOutcome::Partial(p) => {
                assert_eq!(p.remaining_arity(), c.remaining_arity());
                assert_eq!(p.bound.len(), 0);
            }
            _ => panic!(),
        }
    }
}
