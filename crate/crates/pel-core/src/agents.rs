//! Hierarchical agent orchestration: an org chart of router and terminal
//! agents, each registered as a callable closure in the global environment.
//!
//! Terminals answer queries directly through the backend. Routers ask the
//! backend to write a Pel program and execute it in a restricted environment
//! where only the router's own children are callable; the emitted code is
//! parse- and capability-checked before it runs, and failing forms go
//! through self-heal up to the interpreter's cap.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Deserialize;

use crate::closure::{ArgSpec, ClosureBody, Param, ParamDefault, PelClosure};
use crate::doc::{DocParam, Docstring};
use crate::env::Env;
use crate::error::{ErrorKind, PelError, Result};
use crate::eval::{eval, FiredCall, Interp};
use crate::grammar::CapabilityConfig;
use crate::llm::{self, RequestKind};
use crate::parser::parse_source;
use crate::value::PelValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Router,
    Terminal,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Router => "router",
            AgentKind::Terminal => "terminal",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    /// Hierarchical name, e.g. "MAIN/MARKETING/SOCIAL_MEDIA".
    pub path: String,
    /// Persona text for the backend prompt.
    pub role: String,
    pub kind: AgentKind,
    /// Full paths of direct sub-agents.
    #[serde(default)]
    pub children: Vec<String>,
    /// Opaque tool description passed through to the backend.
    #[serde(default)]
    pub tools: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct AgentRegistry {
    specs: HashMap<String, AgentSpec>,
    root: Option<String>,
}

impl AgentRegistry {
    pub fn get(&self, path: &str) -> Option<&AgentSpec> {
        self.specs.get(path)
    }

    pub fn contains(&self, path: &str) -> bool {
        self.specs.contains_key(path)
    }

    pub fn root(&self) -> Option<&AgentSpec> {
        self.root.as_deref().and_then(|r| self.specs.get(r))
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn paths(&self) -> Vec<&str> {
        let mut ps: Vec<&str> = self.specs.keys().map(|s| s.as_str()).collect();
        ps.sort_unstable();
        ps
    }
}

fn malformed(msg: String) -> PelError {
    PelError::new(ErrorKind::MalformedOrg, msg)
}

pub fn load_org(path: &std::path::Path) -> Result<AgentRegistry> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        PelError::new(ErrorKind::IoError, format!("cannot read org chart {}: {e}", path.display()))
    })?;
    org_from_json(&text).map_err(|e| malformed(format!("{}: {}", path.display(), e.message)))
}

/// Parse and verify an org chart: a JSON array of agent specs forming a
/// tree under a single root, routers with ≥ 1 child, terminals with none.
pub fn org_from_json(text: &str) -> Result<AgentRegistry> {
    let specs: Vec<AgentSpec> =
        serde_json::from_str(text).map_err(|e| malformed(format!("bad org chart: {e}")))?;
    if specs.is_empty() {
        return Err(malformed("org chart is empty".to_string()));
    }
    let mut by_path: HashMap<String, AgentSpec> = HashMap::new();
    for spec in specs {
        if spec.path.is_empty() || spec.path.split('/').any(|seg| seg.is_empty()) {
            return Err(malformed(format!("invalid agent path {:?}", spec.path)));
        }
        match spec.kind {
            AgentKind::Router if spec.children.is_empty() => {
                return Err(malformed(format!("router {} has no children", spec.path)));
            }
            AgentKind::Terminal if !spec.children.is_empty() => {
                return Err(malformed(format!("terminal {} may not have children", spec.path)));
            }
            _ => {}
        }
        if by_path.insert(spec.path.clone(), spec.clone()).is_some() {
            return Err(malformed(format!("duplicate agent path {}", spec.path)));
        }
    }
    let mut referenced: HashSet<&str> = HashSet::new();
    for spec in by_path.values() {
        for child in &spec.children {
            if !by_path.contains_key(child) {
                return Err(malformed(format!("child {child} of {} has no spec", spec.path)));
            }
            if !child.starts_with(&format!("{}/", spec.path)) {
                return Err(malformed(format!("child {child} is not under {}/", spec.path)));
            }
            if !referenced.insert(child.as_str()) {
                return Err(malformed(format!("agent {child} is referenced more than once")));
            }
        }
    }
    let mut roots: Vec<&str> = by_path
        .keys()
        .filter(|p| !referenced.contains(p.as_str()))
        .map(|p| p.as_str())
        .collect();
    roots.sort_unstable();
    let root = match roots.as_slice() {
        [] => return Err(malformed("org chart has no root agent".to_string())),
        [one] => one.to_string(),
        many => return Err(malformed(format!("multiple root agents: {}", many.join(", ")))),
    };
    Ok(AgentRegistry { specs: by_path, root: Some(root) })
}

/// Define every agent path as a protected closure in the interpreter's
/// global environment and make the registry available for dispatch.
pub fn register_agents(interp: &Interp, registry: AgentRegistry) {
    let mut paths: Vec<&AgentSpec> = registry.specs.values().collect();
    paths.sort_unstable_by(|a, b| a.path.cmp(&b.path));
    for spec in paths {
        interp
            .global
            .define_protected(&spec.path, PelValue::Closure(Arc::new(make_agent_closure(spec))));
    }
    *interp.agents.write().unwrap() = registry;
}

fn make_agent_closure(spec: &AgentSpec) -> PelClosure {
    let params = vec![
        Param { name: "query".to_string(), default: None },
        Param { name: "context".to_string(), default: Some(ParamDefault::Value(PelValue::Nil)) },
        Param { name: "expect".to_string(), default: Some(ParamDefault::Value(PelValue::str("string"))) },
    ];
    let mut description = format!("Queries the {} agent {}.\nRole: {}", spec.kind.name(), spec.path, spec.role);
    if let Some(tools) = &spec.tools {
        description.push_str("\nTools: ");
        description.push_str(tools);
    }
    let doc = Docstring {
        signature: format!("({} :query :context #nil :expect \"string\")", spec.path),
        params: vec![
            DocParam {
                name: "query".to_string(),
                ty: "PelString".to_string(),
                note: "the task or question for the agent".to_string(),
            },
            DocParam {
                name: "context".to_string(),
                ty: "PelValue (optional)".to_string(),
                note: "context the agent may use, default #nil".to_string(),
            },
            DocParam {
                name: "expect".to_string(),
                ty: "PelString (optional)".to_string(),
                note: "reply type: \"string\", \"num\" or \"bool\", default \"string\"".to_string(),
            },
        ],
        description,
        example: format!("({} :query \"status report\" :expect \"string\")", spec.path),
    };
    PelClosure {
        name: Some(spec.path.clone()),
        strict: true,
        spec: Arc::new(ArgSpec::new(params)),
        bound: HashMap::new(),
        env: Env::new(),
        body: ClosureBody::Builtin(agent_dispatch),
        doc: Some(Arc::new(doc)),
        tag: Some(spec.path.clone()),
    }
}

/// Builtin body shared by every agent closure; the org path rides in the
/// closure's tag.
fn agent_dispatch(interp: &Interp, call: &FiredCall) -> Result<PelValue> {
    let path = call.closure.tag.clone().expect("agent closures carry their path");
    let spec = {
        let registry = interp.agents.read().unwrap();
        registry
            .get(&path)
            .cloned()
            .ok_or_else(|| PelError::new(ErrorKind::UnknownAgent, format!("unknown agent {path}")))?
    };
    check_scope(interp, &path)?;
    let query = match call.value(interp, 0)? {
        PelValue::Str(s) => s,
        other => {
            return Err(PelError::new(
                ErrorKind::TypeMismatch,
                format!(":query must be a string, got {}", other.type_name()),
            ));
        }
    };
    let context = call.value(interp, 1)?;
    let expect = match call.value(interp, 2)? {
        PelValue::Str(s) => s,
        other => {
            return Err(PelError::new(
                ErrorKind::TypeMismatch,
                format!(":expect must be a string, got {}", other.type_name()),
            ));
        }
    };
    llm::check_expect(&expect)?;
    match spec.kind {
        AgentKind::Terminal => llm::agent_reply(
            &*interp.backend,
            &spec.path,
            &spec.role,
            spec.tools.as_deref().unwrap_or("(none)"),
            &query,
            &context,
            &expect,
        ),
        AgentKind::Router => {
            run_router_task(interp, &path, &query, &context).and_then(|v| llm::coerce_value(v, &expect))
        }
    }
}

/// Inside a router's code only that router's children are reachable.
fn check_scope(interp: &Interp, callee: &str) -> Result<()> {
    let Some(caller) = &interp.agent_scope else {
        return Ok(());
    };
    let registry = interp.agents.read().unwrap();
    let allowed = registry.get(caller).map_or(false, |s| s.children.iter().any(|c| c == callee));
    if allowed {
        Ok(())
    } else {
        Err(PelError::new(
            ErrorKind::UnknownAgent,
            format!("agent {callee} is not a sub-agent of {caller}"),
        ))
    }
}

fn children_docs(registry: &AgentRegistry, spec: &AgentSpec) -> String {
    spec.children
        .iter()
        .map(|c| match registry.get(c) {
            Some(ch) => {
                let mut line = format!("- {} ({}): {}", ch.path, ch.kind.name(), ch.role);
                if let Some(tools) = &ch.tools {
                    line.push_str(&format!(" [tools: {tools}]"));
                }
                line
            }
            None => format!("- {c}"),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn router_caps(spec: &AgentSpec) -> CapabilityConfig {
    let mut caps = CapabilityConfig { closed_symbol_set: true, ..CapabilityConfig::default() };
    caps.allowed_symbols.extend(spec.children.iter().cloned());
    caps.allowed_symbols.insert("context".to_string());
    caps
}

/// Reject emitted code that reaches outside the router's sandbox. Foreign
/// agent paths get the specific UnknownAgent error; anything else the
/// capability validator catches becomes RouterCodeInvalid.
fn check_router_code(
    forms: &[crate::ast::Expr],
    caps: &CapabilityConfig,
    registry: &AgentRegistry,
    spec: &AgentSpec,
) -> Result<()> {
    for form in forms {
        for sym in crate::scheduler::free_symbols(form, &HashSet::new()) {
            if registry.contains(&sym) && !spec.children.iter().any(|c| *c == sym) {
                return Err(PelError::new(
                    ErrorKind::UnknownAgent,
                    format!("agent {sym} is not a sub-agent of {}", spec.path),
                ));
            }
        }
    }
    if let Some(v) = crate::grammar::validate(forms, caps).first() {
        return Err(PelError::new(ErrorKind::RouterCodeInvalid, v.message.clone()).with_span(v.span));
    }
    Ok(())
}

/// Fresh environment for router code: builtins, the router's children, and
/// `context`. Nothing from the caller's scope leaks in.
fn scoped_interp(interp: &Interp, spec: &AgentSpec, context: &PelValue, registry: &AgentRegistry) -> Interp {
    let env = Env::new();
    crate::builtins::install(&env);
    for c in &spec.children {
        if let Some(child) = registry.get(c) {
            env.define_protected(&child.path, PelValue::Closure(Arc::new(make_agent_closure(child))));
        }
    }
    env.define("context", context.clone()).expect("context is not a builtin name");
    Interp {
        global: env,
        agent_scope: Some(spec.path.clone()),
        ..interp.clone()
    }
}

/// The router loop: ask the backend for a program, check it, run it
/// form-by-form with self-heal, return the last form's value (uncoerced).
pub fn run_router_task(interp: &Interp, path: &str, query: &str, context: &PelValue) -> Result<PelValue> {
    let (spec, registry) = {
        let registry = interp.agents.read().unwrap();
        let spec = registry
            .get(path)
            .cloned()
            .ok_or_else(|| PelError::new(ErrorKind::UnknownAgent, format!("unknown agent {path}")))?;
        (spec, registry.clone())
    };
    if spec.kind != AgentKind::Router {
        return Err(PelError::new(
            ErrorKind::UnknownAgent,
            format!("agent {path} is a terminal, not a router"),
        ));
    }
    let prompt = llm::ROUTER_CODEGEN_PROMPT_V1
        .replace("{role}", &spec.role)
        .replace("{path}", &spec.path)
        .replace("{children}", &children_docs(&registry, &spec))
        .replace("{query}", query)
        .replace("{context}", &llm::context_display(context));
    let caps = router_caps(&spec);
    let mut attempts = interp.heal_cap;
    let mut code = interp.backend.request(RequestKind::Complete, &prompt)?;
    let mut forms = loop {
        let checked = parse_source(&code)
            .and_then(|f| {
                if f.is_empty() {
                    Err(PelError::new(ErrorKind::RouterCodeInvalid, "the program is empty".to_string()))
                } else {
                    Ok(f)
                }
            })
            .and_then(|f| check_router_code(&f, &caps, &registry, &spec).map(|_| f));
        match checked {
            Ok(f) => break f,
            Err(e) if e.kind == ErrorKind::UnknownAgent => return Err(e),
            Err(e) => {
                if attempts == 0 {
                    return Err(PelError::new(
                        ErrorKind::RouterCodeInvalid,
                        format!("router {path} emitted invalid code: {}", e.message),
                    ));
                }
                attempts -= 1;
                code = match llm::propose_fix(&*interp.backend, &e, &code, None) {
                    Ok(c) => c,
                    Err(_) => {
                        return Err(PelError::new(
                            ErrorKind::RouterCodeInvalid,
                            format!("router {path} emitted invalid code: {}", e.message),
                        ));
                    }
                };
            }
        }
    };
    if interp.async_mode {
        // Concurrent execution cannot splice a fix into a schedule mid-flight,
        // so each heal round reruns the whole program in a fresh child env.
        loop {
            let scoped = scoped_interp(interp, &spec, context, &registry);
            match crate::scheduler::run_exprs_concurrent(&scoped, &forms, &scoped.global) {
                Ok(v) => return Ok(v),
                Err(e) if e.kind == ErrorKind::UnknownAgent => return Err(e),
                Err(e) => {
                    if attempts == 0 {
                        return Err(e);
                    }
                    attempts -= 1;
                    let i = e.form_index.unwrap_or(0).min(forms.len() - 1);
                    let snippet = forms[i].to_string();
                    let doc = e.context.clone();
                    // a backend that cannot heal should not mask the failure
                    let fix = match llm::propose_fix(&*interp.backend, &e, &snippet, doc.as_deref()) {
                        Ok(f) => f,
                        Err(_) => return Err(e),
                    };
                    let fixed = match parse_source(&fix) {
                        Ok(f) if !f.is_empty() => f,
                        _ => {
                            return Err(PelError::new(
                                ErrorKind::RouterCodeInvalid,
                                format!("self-heal for router {path} produced unparseable code"),
                            ));
                        }
                    };
                    check_router_code(&fixed, &caps, &registry, &spec)?;
                    forms.splice(i..i + 1, fixed);
                }
            }
        }
    }
    let scoped = scoped_interp(interp, &spec, context, &registry);
    let mut last = PelValue::Nil;
    let mut i = 0;
    while i < forms.len() {
        match eval(&scoped, &forms[i], &scoped.global) {
            Ok(v) => {
                last = v;
                i += 1;
            }
            Err(e) if e.kind == ErrorKind::UnknownAgent => return Err(e),
            Err(e) => {
                if attempts == 0 {
                    return Err(e);
                }
                attempts -= 1;
                let snippet = forms[i].to_string();
                let doc = e.context.clone();
                // a backend that cannot heal should not mask the failure
                let fix = match llm::propose_fix(&*interp.backend, &e, &snippet, doc.as_deref()) {
                    Ok(f) => f,
                    Err(_) => return Err(e),
                };
                let fixed = match parse_source(&fix) {
                    Ok(f) if !f.is_empty() => f,
                    _ => {
                        return Err(PelError::new(
                            ErrorKind::RouterCodeInvalid,
                            format!("self-heal for router {path} produced unparseable code"),
                        ));
                    }
                };
                check_router_code(&fixed, &caps, &registry, &spec)?;
                forms.splice(i..i + 1, fixed);
            }
        }
    }
    Ok(last)
}

/// Round-robin discussion: rounds × |group| backend turns, each prompt
/// carrying the persona, topic, context and transcript so far. Returns the
/// transcript as "SPEAKER: utterance" lines.
pub fn run_meeting(
    interp: &Interp,
    group: &[String],
    rounds: usize,
    topic: &str,
    context: &PelValue,
) -> Result<String> {
    let specs: Vec<AgentSpec> = {
        let registry = interp.agents.read().unwrap();
        group
            .iter()
            .map(|p| {
                registry
                    .get(p)
                    .cloned()
                    .ok_or_else(|| PelError::new(ErrorKind::UnknownAgent, format!("unknown agent {p}")))
            })
            .collect::<Result<_>>()?
    };
    for p in group {
        check_scope(interp, p)?;
    }
    let ctx = llm::context_display(context);
    let mut lines: Vec<String> = Vec::new();
    for _ in 0..rounds {
        for spec in &specs {
            let so_far = if lines.is_empty() { "(the meeting is just starting)".to_string() } else { lines.join("\n") };
            let prompt = llm::MEETING_TURN_PROMPT_V1
                .replace("{role}", &spec.role)
                .replace("{path}", &spec.path)
                .replace("{topic}", topic)
                .replace("{context}", &ctx)
                .replace("{transcript}", &so_far);
            let reply = interp.backend.request(RequestKind::Agent, &prompt)?;
            lines.push(format!("{}: {}", spec.path, reply.trim()));
        }
    }
    Ok(lines.join("\n"))
}
