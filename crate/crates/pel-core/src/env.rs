//! Lexical environments: a chain of frames, each a name -> value map.
//! Frames allow concurrent reads; writes go through the frame's lock, which
//! is what lets the scheduler run forms in parallel against one global env.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, RwLock};

use crate::error::{ErrorKind, PelError, Result};
use crate::value::PelValue;

#[derive(Clone)]
pub struct Env(Arc<EnvData>);

struct EnvData {
    vars: RwLock<HashMap<String, PelValue>>,
    /// Names that `def` may not rebind in this frame (builtins, agents).
    protected: RwLock<HashSet<String>>,
    parent: Option<Env>,
}

impl Env {
    pub fn new() -> Env {
        Env(Arc::new(EnvData {
            vars: RwLock::new(HashMap::new()),
            protected: RwLock::new(HashSet::new()),
            parent: None,
        }))
    }

    pub fn child(&self) -> Env {
        Env(Arc::new(EnvData {
            vars: RwLock::new(HashMap::new()),
            protected: RwLock::new(HashSet::new()),
            parent: Some(self.clone()),
        }))
    }

    pub fn same_frame(&self, other: &Env) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Walk the chain from innermost to outermost.
    pub fn lookup(&self, name: &str) -> Option<PelValue> {
        let mut cur = Some(self);
        while let Some(env) = cur {
            if let Some(v) = env.0.vars.read().unwrap().get(name) {
                return Some(v.clone());
            }
            cur = env.0.parent.as_ref();
        }
        None
    }

    /// Bind in this frame. Returns the value so `(def x 5)` evaluates to 5.
    pub fn define(&self, name: &str, value: PelValue) -> Result<PelValue> {
        if self.0.protected.read().unwrap().contains(name) {
            return Err(PelError::new(
                ErrorKind::RedefinitionOfBuiltin,
                format!("`{name}` is a builtin and cannot be redefined"),
            ));
        }
        self.0.vars.write().unwrap().insert(name.to_string(), value.clone());
        Ok(value)
    }

    /// Seed a builtin or agent binding and shield it from user `def`.
    pub fn define_protected(&self, name: &str, value: PelValue) {
        self.0.vars.write().unwrap().insert(name.to_string(), value);
        self.0.protected.write().unwrap().insert(name.to_string());
    }

    pub fn is_protected(&self, name: &str) -> bool {
        self.0.protected.read().unwrap().contains(name)
    }

    /// Copy of this frame's bindings (not the parents'). The REPL snapshots
    /// the global frame before each top-level form.
    pub fn snapshot(&self) -> HashMap<String, PelValue> {
        self.0.vars.read().unwrap().clone()
    }

    pub fn restore(&self, snap: HashMap<String, PelValue>) {
        *self.0.vars.write().unwrap() = snap;
    }
}

impl Default for Env {
    fn default() -> Self {
        Env::new()
    }
}

impl std::fmt::Debug for Env {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("<env>")
    }
}
