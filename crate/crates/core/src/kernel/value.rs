//! The answer universe shared by every program.
//!
//! Programs are deep-embedded syntax trees whose `bind` nodes hide the type of
//! the intermediate result, and the normalizer re-associates binds freely. A
//! single ordered value universe keeps that re-association well-typed without
//! trait objects over every possible answer type.

use std::collections::BTreeMap;
use std::fmt;

/// A return value of a program.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Char(char),
    Tuple(Vec<Value>),
    /// `by_continue a`
    Continue(Box<Value>),
    /// `by_break b`
    Break(Box<Value>),
}

/// Named bindings for the free variables of an assertion or program family.
pub type Env = BTreeMap<String, Value>;

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Int(n)
    }

    pub fn nat(n: usize) -> Self {
        Value::Int(n as i64)
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Tuple(vec![a, b])
    }

    pub fn by_continue(a: Value) -> Self {
        Value::Continue(Box::new(a))
    }

    pub fn by_break(b: Value) -> Self {
        Value::Break(Box::new(b))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    /// Integer payload, panicking with a readable message otherwise. Used by
    /// program builders whose argument types are fixed by construction.
    pub fn expect_int(&self) -> i64 {
        self.as_int()
            .unwrap_or_else(|| panic!("expected an integer value, found {self}"))
    }

    pub fn as_char(&self) -> Option<char> {
        match self {
            Value::Char(c) => Some(*c),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(items) => Some(items),
            _ => None,
        }
    }

    pub fn is_continue(&self) -> bool {
        matches!(self, Value::Continue(_))
    }

    pub fn is_break(&self) -> bool {
        matches!(self, Value::Break(_))
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<char> for Value {
    fn from(c: char) -> Self {
        Value::Char(c)
    }
}

impl From<()> for Value {
    fn from(_: ()) -> Self {
        Value::Unit
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "tt"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Char(c) => write!(f, "'{c}'"),
            Value::Tuple(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
            Value::Continue(a) => write!(f, "by_continue({a})"),
            Value::Break(b) => write!(f, "by_break({b})"),
        }
    }
}

/// Renders an environment as `{x = 1, y = 2}`.
pub fn render_env(env: &Env) -> String {
    let body: Vec<String> = env.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!("{{{}}}", body.join(", "))
}
