//! Every language-model touchpoint goes through this module: case
//! conditions, summarize, the self-heal helper, agent queries and meeting
//! turns. Nothing else in the crate performs network I/O.
//!
//! Two backends ship: a deterministic scripted mock (first matching rule
//! wins) and a chat-completions HTTP client. Prompt templates are versioned
//! constants so a wording change is a visible diff.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::doc::Docstring;
use crate::error::{ErrorKind, PelError, Result};
use crate::num::PelNum;
use crate::value::PelValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestKind {
    Condition,
    Fix,
    Agent,
    Summarize,
    Complete,
}

impl RequestKind {
    pub fn name(self) -> &'static str {
        match self {
            RequestKind::Condition => "condition",
            RequestKind::Fix => "fix",
            RequestKind::Agent => "agent",
            RequestKind::Summarize => "summarize",
            RequestKind::Complete => "complete",
        }
    }

    fn parse(s: &str) -> Option<RequestKind> {
        Some(match s {
            "condition" => RequestKind::Condition,
            "fix" => RequestKind::Fix,
            "agent" => RequestKind::Agent,
            "summarize" => RequestKind::Summarize,
            "complete" => RequestKind::Complete,
            _ => return None,
        })
    }
}

pub trait LlmBackend: Send + Sync {
    fn request(&self, kind: RequestKind, prompt: &str) -> Result<String>;
}

pub const CONDITION_PROMPT_V1: &str = "You judge whether a condition holds for a value.\n\nvalue:\n{value}\n\ncondition: {condition}\n\nReply with exactly true or false.";

pub const SUMMARIZE_PROMPT_V1: &str = "Summarize the following text briefly.\n\ntext:\n{text}";

pub const FIX_PROMPT_V1: &str = "A Pel expression failed to evaluate. Propose a corrected replacement.\n\nerror: {error}\n\nfailing expression:\n{snippet}\n\nfunction documentation:\n{doc}\n\nReply with only the corrected Pel code.";

pub const AGENT_PROMPT_V1: &str = "You are {role}.\nspeaker: {path}\ntools:\n{tools}\n\nquery: {query}\ncontext: {context}\n\nReply with a plain {expect} value and nothing else.";

pub const MEETING_TURN_PROMPT_V1: &str = "You are {role}.\nspeaker: {path}\nYou are in a meeting about: {topic}\ncontext: {context}\n\ntranscript so far:\n{transcript}\n\nIt is your turn. Reply with your utterance only.";

pub const ROUTER_CODEGEN_PROMPT_V1: &str = "You are {role}.\nspeaker: {path}\nYou coordinate these sub-agents, callable as Pel closures:\n{children}\n\nWrite a Pel program that accomplishes the task below. The symbol `context` is bound to the task context. Call only your own sub-agents.\n\ntask: {query}\ncontext: {context}\n\nReply with only Pel code.";

fn parse_bool_reply(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" => Some(true),
        "false" | "no" => Some(false),
        _ => None,
    }
}

/// Ask whether `condition` holds for the displayed scrutinee.
pub fn eval_condition(backend: &dyn LlmBackend, scrut_display: &str, condition: &str) -> Result<bool> {
    let prompt = CONDITION_PROMPT_V1
        .replace("{value}", scrut_display)
        .replace("{condition}", condition);
    let reply = backend.request(RequestKind::Condition, &prompt)?;
    parse_bool_reply(&reply).ok_or_else(|| {
        PelError::new(ErrorKind::BackendError, format!("unparseable boolean reply: {:?}", reply.trim()))
    })
}

pub fn summarize_text(backend: &dyn LlmBackend, text: &str) -> Result<String> {
    let prompt = SUMMARIZE_PROMPT_V1.replace("{text}", text);
    backend.request(RequestKind::Summarize, &prompt)
}

/// Ask the helper for a replacement snippet. The caller must parse-validate
/// the reply before resuming evaluation.
pub fn propose_fix(backend: &dyn LlmBackend, error: &PelError, snippet: &str, doc: Option<&Docstring>) -> Result<String> {
    let doc_text = doc.map(|d| d.render()).unwrap_or_else(|| "(none)".to_string());
    let prompt = FIX_PROMPT_V1
        .replace("{error}", &error.to_string())
        .replace("{snippet}", snippet)
        .replace("{doc}", &doc_text);
    backend.request(RequestKind::Fix, &prompt)
}

pub fn complete(backend: &dyn LlmBackend, prompt: &str) -> Result<String> {
    backend.request(RequestKind::Complete, prompt)
}

/// Query a terminal agent and coerce its textual reply to the expected type.
pub fn agent_reply(
    backend: &dyn LlmBackend,
    path: &str,
    role: &str,
    tools: &str,
    query: &str,
    context: &PelValue,
    expect: &str,
) -> Result<PelValue> {
    check_expect(expect)?;
    let prompt = AGENT_PROMPT_V1
        .replace("{role}", role)
        .replace("{path}", path)
        .replace("{tools}", if tools.is_empty() { "(none)" } else { tools })
        .replace("{query}", query)
        .replace("{context}", &context_display(context))
        .replace("{expect}", expect);
    let reply = backend.request(RequestKind::Agent, &prompt)?;
    coerce_reply(reply, expect)
}

pub fn context_display(context: &PelValue) -> String {
    match context {
        PelValue::Nil => "(none)".to_string(),
        PelValue::Str(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn check_expect(expect: &str) -> Result<()> {
    match expect {
        "string" | "num" | "bool" => Ok(()),
        other => Err(PelError::new(
            ErrorKind::TypeMismatch,
            format!(":expect must be \"string\", \"num\" or \"bool\", got {other:?}"),
        )),
    }
}

fn coerce_reply(reply: String, expect: &str) -> Result<PelValue> {
    match expect {
        "string" => Ok(PelValue::Str(reply)),
        "num" => {
            let text = reply.trim();
            // PelNum::parse is lenient; insist the text really is a number
            if text.parse::<i64>().is_ok() || text.parse::<f64>().is_ok() {
                Ok(PelValue::Num(PelNum::parse(text)))
            } else {
                Err(PelError::new(
                    ErrorKind::CoercionError,
                    format!("reply does not parse as a num: {text:?}"),
                ))
            }
        }
        "bool" => match parse_bool_reply(&reply) {
            Some(b) => Ok(PelValue::Bool(b)),
            None => Err(PelError::new(
                ErrorKind::CoercionError,
                format!("reply does not parse as a bool: {:?}", reply.trim()),
            )),
        },
        _ => check_expect(expect).map(|_| unreachable!()),
    }
}

/// Coerce an already-evaluated value (a router program's result) to the
/// expected type. Strings parse; anything else stringifies for "string".
pub fn coerce_value(value: PelValue, expect: &str) -> Result<PelValue> {
    check_expect(expect)?;
    match (expect, value) {
        ("string", PelValue::Str(s)) => Ok(PelValue::Str(s)),
        ("string", other) => Ok(PelValue::Str(other.to_string())),
        ("num", PelValue::Num(n)) => Ok(PelValue::Num(n)),
        ("num", PelValue::Str(s)) => coerce_reply(s, "num"),
        ("num", other) => Err(PelError::new(
            ErrorKind::CoercionError,
            format!("cannot coerce {} to a num", other.type_name()),
        )),
        ("bool", PelValue::Bool(b)) => Ok(PelValue::Bool(b)),
        ("bool", PelValue::Str(s)) => coerce_reply(s, "bool"),
        ("bool", other) => Err(PelError::new(
            ErrorKind::CoercionError,
            format!("cannot coerce {} to a bool", other.type_name()),
        )),
        _ => unreachable!("expect checked above"),
    }
}

enum DefaultPolicy {
    Error,
    Echo,
}

struct Rule {
    kind: Option<RequestKind>,
    /// All patterns must appear in the prompt (joined with `&&` in the file).
    patterns: Vec<String>,
    reply: String,
    delay: Duration,
}

/// Deterministic mock backend driven by a line-oriented script:
///
/// ```text
/// # kind | substring patterns | reply
/// condition | is a premium member | true
/// agent@100 | speaker: HQ/FIN     | The report is ready.
/// default: error
/// ```
///
/// `kind` is one of condition/fix/agent/summarize/complete or `any`; an
/// optional `@millis` suffix delays the reply (for scheduler timing tests).
/// Patterns are `&&`-separated substrings that must all match. Replies
/// unescape `\n` and `\\`. First matching rule wins.
pub struct ScriptedMock {
    rules: Vec<Rule>,
    default: DefaultPolicy,
    log: Mutex<Vec<(RequestKind, String)>>,
}

impl ScriptedMock {
    /// No rules, error on any request.
    pub fn empty() -> ScriptedMock {
        ScriptedMock { rules: Vec::new(), default: DefaultPolicy::Error, log: Mutex::new(Vec::new()) }
    }

    /// Echo the prompt back for any request without a rule.
    pub fn echoing() -> ScriptedMock {
        ScriptedMock { rules: Vec::new(), default: DefaultPolicy::Echo, log: Mutex::new(Vec::new()) }
    }

    /// Every request seen so far, in arrival order. Lets tests count and
    /// inspect backend traffic.
    pub fn requests(&self) -> Vec<(RequestKind, String)> {
        self.log.lock().unwrap().clone()
    }

    /// Builder for tests: add a rule matching one kind and one substring.
    pub fn rule(mut self, kind: RequestKind, pattern: &str, reply: &str) -> ScriptedMock {
        self.rules.push(Rule {
            kind: Some(kind),
            patterns: vec![pattern.to_string()],
            reply: reply.to_string(),
            delay: Duration::ZERO,
        });
        self
    }

    pub fn shared(self) -> Arc<dyn LlmBackend> {
        Arc::new(self)
    }

    pub fn load(path: &std::path::Path) -> Result<ScriptedMock> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PelError::new(ErrorKind::IoError, format!("cannot read mock script {}: {e}", path.display()))
        })?;
        ScriptedMock::parse(&text).map_err(|e| {
            PelError::new(ErrorKind::IoError, format!("{}: {}", path.display(), e.message))
        })
    }

    pub fn parse(text: &str) -> Result<ScriptedMock> {
        let mut mock = ScriptedMock::empty();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(policy) = line.strip_prefix("default:") {
                mock.default = match policy.trim() {
                    "error" => DefaultPolicy::Error,
                    "echo" => DefaultPolicy::Echo,
                    other => {
                        return Err(PelError::new(
                            ErrorKind::IoError,
                            format!("line {}: unknown default policy {other:?}", lineno + 1),
                        ));
                    }
                };
                continue;
            }
            let mut parts = line.splitn(3, '|');
            let (kind_part, pattern_part, reply_part) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c)) => (a.trim(), b.trim(), c.trim()),
                _ => {
                    return Err(PelError::new(
                        ErrorKind::IoError,
                        format!("line {}: expected `kind | pattern | reply`", lineno + 1),
                    ));
                }
            };
            let (kind_name, delay) = match kind_part.split_once('@') {
                Some((k, ms)) => {
                    let ms: u64 = ms.trim().parse().map_err(|_| {
                        PelError::new(ErrorKind::IoError, format!("line {}: bad delay {ms:?}", lineno + 1))
                    })?;
                    (k.trim(), Duration::from_millis(ms))
                }
                None => (kind_part, Duration::ZERO),
            };
            let kind = if kind_name == "any" {
                None
            } else {
                Some(RequestKind::parse(kind_name).ok_or_else(|| {
                    PelError::new(ErrorKind::IoError, format!("line {}: unknown kind {kind_name:?}", lineno + 1))
                })?)
            };
            let patterns = pattern_part
                .split("&&")
                .map(|p| unescape(p.trim()))
                .filter(|p| !p.is_empty())
                .collect();
            let reply = unescape(reply_part);
            mock.rules.push(Rule { kind, patterns, reply, delay });
        }
        Ok(mock)
    }
}

/// Both patterns and replies may spell newlines as `\n` in the script file.
fn unescape(s: &str) -> String {
    s.replace("\\n", "\n").replace("\\\\", "\\")
}

impl LlmBackend for ScriptedMock {
    fn request(&self, kind: RequestKind, prompt: &str) -> Result<String> {
        self.log.lock().unwrap().push((kind, prompt.to_string()));
        for rule in &self.rules {
            let kind_ok = rule.kind.map_or(true, |k| k == kind);
            if kind_ok && rule.patterns.iter().all(|p| prompt.contains(p.as_str())) {
                if !rule.delay.is_zero() {
                    std::thread::sleep(rule.delay);
                }
                return Ok(rule.reply.clone());
            }
        }
        match self.default {
            DefaultPolicy::Echo => Ok(prompt.to_string()),
            DefaultPolicy::Error => Err(PelError::new(
                ErrorKind::BackendError,
                format!("no mock rule matches this {} request", kind.name()),
            )),
        }
    }
}

/// Chat-completions client. Configured entirely from the environment:
/// PEL_LLM_URL (base), PEL_LLM_MODEL, PEL_LLM_KEY. Requests fail with
/// BackendError until a URL is configured.
pub struct HttpChat {
    url: Option<String>,
    model: String,
    key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpChat {
    pub fn from_env() -> HttpChat {
        HttpChat {
            url: std::env::var("PEL_LLM_URL").ok().filter(|s| !s.is_empty()),
            model: std::env::var("PEL_LLM_MODEL").unwrap_or_else(|_| "default".to_string()),
            key: std::env::var("PEL_LLM_KEY").ok().filter(|s| !s.is_empty()),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("client construction cannot fail with static options"),
        }
    }
}

impl LlmBackend for HttpChat {
    fn request(&self, _kind: RequestKind, prompt: &str) -> Result<String> {
        let Some(url) = &self.url else {
            return Err(PelError::new(ErrorKind::BackendError, "not configured: set PEL_LLM_URL"));
        };
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.client.post(format!("{}/chat/completions", url.trim_end_matches('/'))).json(&body);
        if let Some(key) = &self.key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| PelError::new(ErrorKind::BackendError, format!("request failed: {e}")))?;
        let status = resp.status();
        let payload: serde_json::Value = resp
            .json()
            .map_err(|e| PelError::new(ErrorKind::BackendError, format!("bad response body: {e}")))?;
        if !status.is_success() {
            return Err(PelError::new(ErrorKind::BackendError, format!("backend returned {status}: {payload}")));
        }
        payload["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.to_string())
            .ok_or_else(|| PelError::new(ErrorKind::BackendError, "no choices in response"))
    }
}
