use std::fmt;

use chrono::NaiveDate;
use serde::{Serialize, Serializer};

/// A single field value.
///
/// Text is held without trailing padding; the declared width still governs
/// byte accounting. `Decimal` is fixed-point in hundredths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Decimal(i64),
    Date(NaiveDate),
    Text(String),
}

pub type Row = Vec<Value>;

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        let mut s: String = s.into();
        let trimmed = s.trim_end_matches(' ').len();
        s.truncate(trimmed);
        Value::Text(s)
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_date(&self) -> Option<NaiveDate> {
        match self {
            Value::Date(d) => Some(*d),
            _ => None,
        }
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Decimal(_) => "decimal",
            Value::Date(_) => "date",
            Value::Text(_) => "text",
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Text(s) if s.is_empty())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Decimal(v) => {
                let sign = if *v < 0 { "-" } else { "" };
                let a = v.unsigned_abs();
                write!(f, "{sign}{}.{:02}", a / 100, a % 100)
            }
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => serializer.serialize_i64(*v),
            Value::Decimal(v) => serializer.serialize_f64(*v as f64 / 100.0),
            Value::Date(_) | Value::Text(_) => serializer.collect_str(self),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::text(s)
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::text(s)
    }
}

impl From<NaiveDate> for Value {
    fn from(d: NaiveDate) -> Self {
        Value::Date(d)
    }
}

/// Parses a decimal literal like `-12.5` into hundredths.
pub fn parse_decimal(s: &str) -> Option<i64> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() || frac.len() > 2 || !int.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let whole: i64 = int.parse().ok()?;
    let mut cents: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    if frac.len() == 1 {
        cents *= 10;
    }
    let v = whole.checked_mul(100)?.checked_add(cents)?;
    Some(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_drops_trailing_padding() {
        assert_eq!(Value::text("ab  "), Value::Text("ab".into()));
        assert_eq!(Value::text(" ab"), Value::Text(" ab".into()));
    }

    #[test]
    fn decimal_display_and_parse() {
        assert_eq!(Value::Decimal(-1205).to_string(), "-12.05");
        assert_eq!(parse_decimal("-12.05"), Some(-1205));
        assert_eq!(parse_decimal("3.5"), Some(350));
        assert_eq!(parse_decimal("7"), Some(700));
        assert_eq!(parse_decimal("1.234"), None);
        assert_eq!(parse_decimal("x"), None);
    }
}
