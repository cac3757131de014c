//! Runtime values and their canonical display forms.

use std::fmt;
use std::sync::Arc;

use crate::closure::PelClosure;
use crate::num::PelNum;

#[derive(Debug, Clone)]
pub enum PelValue {
    Num(PelNum),
    Str(String),
    Bool(bool),
    Nil,
    Key(String),
    Pair(String, Box<PelValue>),
    List(Vec<PelValue>),
    Closure(Arc<PelClosure>),
}

impl PelValue {
    pub fn int(i: i64) -> PelValue {
        PelValue::Num(PelNum::Int(i))
    }

    pub fn str(s: impl Into<String>) -> PelValue {
        PelValue::Str(s.into())
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            PelValue::Num(_) => "number",
            PelValue::Str(_) => "string",
            PelValue::Bool(_) => "bool",
            PelValue::Nil => "nil",
            PelValue::Key(_) => "key",
            PelValue::Pair(..) => "pair",
            PelValue::List(_) => "list",
            PelValue::Closure(_) => "closure",
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, PelValue::Nil)
    }

    /// String contents for `print`: strings appear without quotes, everything
    /// else uses the canonical form.
    pub fn print_form(&self) -> String {
        match self {
            PelValue::Str(s) => s.clone(),
            other => other.to_string(),
        }
    }
}

/// Structural equality; closures compare by identity.
impl PartialEq for PelValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PelValue::Num(a), PelValue::Num(b)) => a == b,
            (PelValue::Str(a), PelValue::Str(b)) => a == b,
            (PelValue::Bool(a), PelValue::Bool(b)) => a == b,
            (PelValue::Nil, PelValue::Nil) => true,
            (PelValue::Key(a), PelValue::Key(b)) => a == b,
            (PelValue::Pair(ka, va), PelValue::Pair(kb, vb)) => ka == kb && va == vb,
            (PelValue::List(a), PelValue::List(b)) => a == b,
            (PelValue::Closure(a), PelValue::Closure(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for PelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PelValue::Num(n) => write!(f, "{n}"),
            PelValue::Str(s) => write!(f, "\"{s}\""),
            PelValue::Bool(true) => write!(f, "#t"),
            PelValue::Bool(false) => write!(f, "#f"),
            PelValue::Nil => write!(f, "#nil"),
            PelValue::Key(k) => write!(f, ":{k}"),
            PelValue::Pair(k, v) => write!(f, ":{k} {v}"),
            PelValue::List(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            PelValue::Closure(c) => {
                let name = c.name.as_deref().unwrap_or("anonymous");
                write!(f, "#<closure {} {}>", name, c.remaining_arity())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_display_forms() {
        assert_eq!(PelValue::int(9).to_string(), "9");
        assert_eq!(PelValue::str("hello").to_string(), "\"hello\"");
        assert_eq!(PelValue::Bool(true).to_string(), "#t");
        assert_eq!(PelValue::Nil.to_string(), "#nil");
        assert_eq!(PelValue::Key("name".into()).to_string(), ":name");
        let list = PelValue::List(vec![
            PelValue::Pair("a".into(), Box::new(PelValue::int(1))),
            PelValue::Pair("c".into(), Box::new(PelValue::int(3))),
        ]);
        assert_eq!(list.to_string(), "[:a 1 :c 3]");
    }

    #[test]
    fn print_form_unquotes_strings() {
        assert_eq!(PelValue::str("hello").print_form(), "hello");
        assert_eq!(PelValue::int(5).print_form(), "5");
    }

    #[test]
    fn structural_equality() {
        let a = PelValue::List(vec![PelValue::int(1), PelValue::str("x")]);
        let b = PelValue::List(vec![PelValue::int(1), PelValue::str("x")]);
        assert_eq!(a, b);
        assert_eq!(PelValue::Num(PelNum::Int(9)), PelValue::Num(PelNum::Float(9.0)));
        assert_ne!(PelValue::Nil, PelValue::Bool(false));
    }
}
