//! Fixed-width table schemas.
//!
//! Every field has a declared byte width and a record's length is the sum of
//! its field widths. All capacity accounting (table bytes, bytes scanned) is
//! expressed in these units, independent of how values are held in memory.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Text,
    Integer,
    /// Fixed-point with two decimal places.
    Decimal,
    Date,
    /// Text drawn from a closed value set.
    Enum(Vec<String>),
}

impl FieldKind {
    pub fn label(&self) -> &'static str {
        match self {
            FieldKind::Text => "text",
            FieldKind::Integer => "integer",
            FieldKind::Decimal => "decimal",
            FieldKind::Date => "date",
            FieldKind::Enum(_) => "enum",
        }
    }

    /// Text and enum fields hold the same kind of value and may be joined.
    pub fn is_compatible(&self, other: &FieldKind) -> bool {
        matches!(
            (self, other),
            (
                FieldKind::Text | FieldKind::Enum(_),
                FieldKind::Text | FieldKind::Enum(_)
            ) | (FieldKind::Integer, FieldKind::Integer)
                | (FieldKind::Decimal, FieldKind::Decimal)
                | (FieldKind::Date, FieldKind::Date)
        )
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, FieldKind::Integer | FieldKind::Decimal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub kind: FieldKind,
    pub width: usize,
}

impl FieldSpec {
    pub fn new(name: impl Into<String>, kind: FieldKind, width: usize) -> Self {
        Self {
            name: name.into(),
            kind,
            width,
        }
    }

    pub fn text(name: impl Into<String>, width: usize) -> Self {
        Self::new(name, FieldKind::Text, width)
    }

    pub fn integer(name: impl Into<String>, width: usize) -> Self {
        Self::new(name, FieldKind::Integer, width)
    }

    pub fn decimal(name: impl Into<String>, width: usize) -> Self {
        Self::new(name, FieldKind::Decimal, width)
    }

    pub fn date(name: impl Into<String>, width: usize) -> Self {
        Self::new(name, FieldKind::Date, width)
    }

    pub fn enumeration<S: Into<String>>(
        name: impl Into<String>,
        width: usize,
        values: impl IntoIterator<Item = S>,
    ) -> Self {
        Self::new(
            name,
            FieldKind::Enum(values.into_iter().map(Into::into).collect()),
            width,
        )
    }

    /// Same field under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Checks that `value` has this field's kind and fits its width.
    pub fn check(&self, value: &Value) -> Result<(), String> {
        match (&self.kind, value) {
            (FieldKind::Text, Value::Text(s)) => self.check_len(s),
            (FieldKind::Enum(domain), Value::Text(s)) => {
                if domain.iter().any(|d| d == s) {
                    Ok(())
                } else {
                    Err(format!(
                        "value {s:?} is outside the domain of enum field `{}`",
                        self.name
                    ))
                }
            }
            (FieldKind::Integer, Value::Int(v)) | (FieldKind::Decimal, Value::Decimal(v)) => {
                if fits_signed(*v, self.width) {
                    Ok(())
                } else {
                    Err(format!(
                        "value {value} overflows {}-byte field `{}`",
                        self.width, self.name
                    ))
                }
            }
            (FieldKind::Date, Value::Date(_)) => Ok(()),
            (kind, value) => Err(format!(
                "field `{}` expects {} but got {}",
                self.name,
                kind.label(),
                value.kind_label()
            )),
        }
    }

    fn check_len(&self, s: &str) -> Result<(), String> {
        if s.len() > self.width {
            Err(format!(
                "value of {} bytes exceeds width {} of field `{}`",
                s.len(),
                self.width,
                self.name
            ))
        } else {
            Ok(())
        }
    }
}

fn fits_signed(v: i64, width: usize) -> bool {
    if width >= 8 {
        return true;
    }
    let bits = 8 * width as u32 - 1;
    let max = (1i64 << bits) - 1;
    let min = -(1i64 << bits);
    (min..=max).contains(&v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    pub name: String,
    pub fields: Vec<FieldSpec>,
    pub record_length: usize,
    pub primary_key: Vec<String>,
    /// When false the primary key is a business key that may repeat
    /// (history-keeping warehouse tables).
    pub unique_key: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("table `{0}` has no fields")]
    Empty(String),
    #[error("table `{table}` declares field `{field}` more than once")]
    DuplicateField { table: String, field: String },
    #[error("field `{field}` of table `{table}` has zero width")]
    ZeroWidth { table: String, field: String },
    #[error("enum field `{field}` of table `{table}` is invalid: {reason}")]
    BadEnum {
        table: String,
        field: String,
        reason: String,
    },
    #[error("primary key of table `{table}` names unknown field `{field}`")]
    UnknownKeyField { table: String, field: String },
    #[error("invalid identifier {0:?}")]
    BadIdentifier(String),
}

fn check_identifier(name: &str) -> Result<(), SchemaError> {
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
    if ok {
        Ok(())
    } else {
        Err(SchemaError::BadIdentifier(name.to_string()))
    }
}

/// Builds a schema whose record length is the sum of its field widths.
pub fn define_table(name: &str, fields: Vec<FieldSpec>, primary_key: &[&str]) -> Result<TableSchema, SchemaError> {
    check_identifier(name)?;
    if fields.is_empty() {
        return Err(SchemaError::Empty(name.to_string()));
    }
    let mut seen = HashSet::new();
    for f in &fields {
        check_identifier(&f.name)?;
        if !seen.insert(f.name.as_str()) {
            return Err(SchemaError::DuplicateField {
                table: name.to_string(),
                field: f.name.clone(),
            });
        }
        if f.width == 0 {
            return Err(SchemaError::ZeroWidth {
                table: name.to_string(),
                field: f.name.clone(),
            });
        }
        if let FieldKind::Enum(domain) = &f.kind {
            let bad = |reason: String| SchemaError::BadEnum {
                table: name.to_string(),
                field: f.name.clone(),
                reason,
            };
            if domain.is_empty() {
                return Err(bad("empty value set".into()));
            }
            if let Some(v) = domain.iter().find(|v| v.len() > f.width) {
                return Err(bad(format!("value {v:?} is wider than {}", f.width)));
            }
        }
    }
    for key in primary_key {
        if !seen.contains(key) {
            return Err(SchemaError::UnknownKeyField {
                table: name.to_string(),
                field: key.to_string(),
            });
        }
    }
    let record_length = fields.iter().map(|f| f.width).sum();
    Ok(TableSchema {
        name: name.to_string(),
        fields,
        record_length,
        primary_key: primary_key.iter().map(|k| k.to_string()).collect(),
        unique_key: true,
    })
}

impl TableSchema {
    /// Marks the primary key as a non-unique business key.
    pub fn historized(mut self) -> Self {
        self.unique_key = false;
        self
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn key_indices(&self) -> Vec<usize> {
        self.primary_key
            .iter()
            .map(|k| self.field_index(k).expect("key fields validated at definition"))
            .collect()
    }

    pub fn field_names(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|f| f.name.as_str())
    }
}

impl fmt::Display for TableSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (", self.name)?;
        for (i, field) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} {}({})", field.name, field.kind.label(), field.width)?;
        }
        write!(f, ") = {} bytes", self.record_length)
    }
}
