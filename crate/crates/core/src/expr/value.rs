use std::fmt;

use serde::{Deserialize, Serialize};

/// A runtime value held in a graph slot or produced by an expression.
///
/// `Null` stands for "never assigned". It never compares equal to anything,
/// itself included, and is falsy under `&&`, `||`, `!` and `?:`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Value {
    #[default]
    Null,
    Bool(bool),
    Num(f64),
    Str(String),
    Ref(String),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn reference(id: impl Into<String>) -> Self {
        Value::Ref(id.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_ref_id(&self) -> Option<&str> {
        match self {
            Value::Ref(id) => Some(id),
            _ => None,
        }
    }

    /// Canonical text form. Booleans render as `1`/`0`, integral numbers
    /// without a fractional part, references as the bare individual id.
    pub fn render(&self) -> String {
        match self {
            Value::Null => String::new(),
            Value::Bool(true) => "1".to_string(),
            Value::Bool(false) => "0".to_string(),
            Value::Num(n) => format_number(*n),
            Value::Str(s) => s.clone(),
            Value::Ref(id) => id.clone(),
        }
    }

    /// Numeric view used by `+` and ordering comparisons.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
            Value::Str(s) => parse_number(s),
            Value::Null | Value::Ref(_) => None,
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Null => false,
            Value::Bool(b) => *b,
            Value::Num(n) => *n != 0.0,
            Value::Str(s) => !(s.is_empty() || s == "0" || s.eq_ignore_ascii_case("false")),
            Value::Ref(_) => true,
        }
    }

    /// Equality as seen by `==` / `===` in restriction expressions.
    ///
    /// Null is unequal to everything. If either side is a string both sides
    /// are compared in their canonical text form, so `$Value == "1"` holds
    /// for `Bool(true)`, `Num(1)` and `Str("1")` alike.
    pub fn loose_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Null, _) | (_, Value::Null) => false,
            (Value::Str(_), _) | (_, Value::Str(_)) => self.render() == other.render(),
            (Value::Ref(a), Value::Ref(b)) => a == b,
            (Value::Ref(_), _) | (_, Value::Ref(_)) => false,
            _ => match (self.as_number(), other.as_number()) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            other => f.write_str(&other.render()),
        }
    }
}

pub(crate) fn parse_number(text: &str) -> Option<f64> {
    let n: f64 = text.trim().parse().ok()?;
    n.is_finite().then_some(n)
}

pub(crate) fn format_number(n: f64) -> String {
    if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}
