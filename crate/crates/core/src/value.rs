//! Runtime values of the language.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::EvalError;

/// A first-order value. The derived ordering is total and is used as the
/// canonical order for sets, distribution supports and printed reports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    /// Interned symbol, used for trace event names such as `"read"`.
    Token(Arc<str>),
    Tuple(Vec<Value>),
    Seq(Vec<Value>),
    Set(BTreeSet<Value>),
}

impl Value {
    pub fn token(s: &str) -> Value {
        Value::Token(Arc::from(s))
    }

    pub fn int_set(range: impl IntoIterator<Item = i64>) -> Value {
        Value::Set(range.into_iter().map(Value::Int).collect())
    }

    pub fn int_seq(items: impl IntoIterator<Item = i64>) -> Value {
        Value::Seq(items.into_iter().map(Value::Int).collect())
    }

    pub fn tuple(items: impl IntoIterator<Item = Value>) -> Value {
        Value::Tuple(items.into_iter().collect())
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Token(_) => "token",
            Value::Tuple(_) => "tuple",
            Value::Seq(_) => "sequence",
            Value::Set(_) => "set",
        }
    }

    /// Guard truthiness: anything other than `false` counts as true.
    pub fn is_truthy(&self) -> bool {
        !matches!(self, Value::Bool(false))
    }

    pub fn as_int(&self) -> Result<i64, EvalError> {
        match self {
            Value::Int(i) => Ok(*i),
            other => Err(EvalError::type_mismatch("int", other)),
        }
    }

    pub fn as_bool(&self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(EvalError::type_mismatch("bool", other)),
        }
    }

    pub fn as_seq(&self) -> Result<&[Value], EvalError> {
        match self {
            Value::Seq(s) => Ok(s),
            other => Err(EvalError::type_mismatch("sequence", other)),
        }
    }

    pub fn as_set(&self) -> Result<&BTreeSet<Value>, EvalError> {
        match self {
            Value::Set(s) => Ok(s),
            other => Err(EvalError::type_mismatch("set", other)),
        }
    }

    /// Elements of a set or sequence, in order.
    pub fn elements(&self) -> Result<Vec<Value>, EvalError> {
        match self {
            Value::Set(s) => Ok(s.iter().cloned().collect()),
            Value::Seq(s) => Ok(s.clone()),
            other => Err(EvalError::type_mismatch("set or sequence", other)),
        }
    }
}

/// The value set denoted by a sampling expression: a set denotes its
/// elements, any other value the singleton containing it.
pub fn vset(v: &Value) -> Result<BTreeSet<Value>, EvalError> {
    match v {
        Value::Set(s) if s.is_empty() => Err(EvalError::EmptySet),
        Value::Set(s) => Ok(s.clone()),
        other => Ok(BTreeSet::from([other.clone()])),
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: impl Iterator<Item = impl fmt::Display>) -> fmt::Result {
    for (i, item) in items.enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Token(t) => write!(f, "{:?}", &**t),
            Value::Tuple(items) => {
                f.write_str("(")?;
                write_list(f, items.iter())?;
                if items.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
            Value::Seq(items) => {
                f.write_str("[")?;
                write_list(f, items.iter())?;
                f.write_str("]")
            }
            Value::Set(items) => {
                f.write_str("{")?;
                write_list(f, items.iter())?;
                f.write_str("}")
            }
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}
