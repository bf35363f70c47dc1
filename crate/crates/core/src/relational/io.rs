//! Line-oriented table dump format.
//!
//! ```text
//! <header line>
//! [MPRODI] 16
//! 50101|01|50|TI|Teknik Informatika|
//! ...
//! ```
//!
//! Fields are pipe-delimited; `\`, `|` and newlines inside text are
//! backslash-escaped. Each section declares its row count so truncated
//! files are detected.

use std::io::{self, BufRead, Write};

use chrono::NaiveDate;

use super::schema::{FieldKind, FieldSpec, TableSchema};
use super::table::{Database, Table};
use super::value::{parse_decimal, Value};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed file at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

fn malformed(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        reason: reason.into(),
    }
}

fn escape(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '|' => out.push_str("\\|"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
}

fn split_fields(line: &str) -> Result<Vec<String>, String> {
    let mut fields = vec![String::new()];
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('\\') => fields.last_mut().unwrap().push('\\'),
                Some('|') => fields.last_mut().unwrap().push('|'),
                Some('n') => fields.last_mut().unwrap().push('\n'),
                other => return Err(format!("bad escape sequence \\{}", other.unwrap_or(' '))),
            },
            '|' => fields.push(String::new()),
            c => fields.last_mut().unwrap().push(c),
        }
    }
    Ok(fields)
}

pub fn encode_row(row: &[Value]) -> String {
    let mut line = String::new();
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            line.push('|');
        }
        match v {
            Value::Text(s) => escape(s, &mut line),
            other => line.push_str(&other.to_string()),
        }
    }
    line
}

fn parse_value(spec: &FieldSpec, raw: String) -> Result<Value, String> {
    let bad = || format!("cannot parse {raw:?} as {} for `{}`", spec.kind.label(), spec.name);
    Ok(match spec.kind {
        FieldKind::Text | FieldKind::Enum(_) => Value::text(raw),
        FieldKind::Integer => Value::Int(raw.parse().map_err(|_| bad())?),
        FieldKind::Decimal => Value::Decimal(parse_decimal(&raw).ok_or_else(bad)?),
        FieldKind::Date => Value::Date(NaiveDate::parse_from_str(&raw, "%Y-%m-%d").map_err(|_| bad())?),
    })
}

pub fn decode_row(schema: &TableSchema, line: &str) -> Result<Vec<Value>, String> {
    let raw = split_fields(line)?;
    if raw.len() != schema.fields.len() {
        return Err(format!(
            "expected {} fields for `{}`, found {}",
            schema.fields.len(),
            schema.name,
            raw.len()
        ));
    }
    schema
        .fields
        .iter()
        .zip(raw)
        .map(|(spec, raw)| parse_value(spec, raw))
        .collect()
}

/// Writes `header` followed by one section per table, rows in stored order.
pub fn write_tables<'a, W: Write>(
    mut w: W,
    header: &str,
    tables: impl IntoIterator<Item = &'a Table>,
) -> io::Result<()> {
    writeln!(w, "{header}")?;
    for table in tables {
        writeln!(w, "[{}] {}", table.name(), table.len())?;
        for row in table.rows() {
            writeln!(w, "{}", encode_row(row))?;
        }
    }
    w.flush()
}

/// Reads a dump written by [`write_tables`]; every schema must have exactly
/// one section. Returns the header line and the loaded tables in schema
/// order.
pub fn read_tables<R: BufRead>(reader: R, schemas: &[TableSchema]) -> Result<(String, Database), FormatError> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(malformed(1, "empty file")),
    };
    let mut loaded: Vec<Option<Table>> = vec![None; schemas.len()];
    while let Some((n, line)) = lines.next() {
        let line = line?;
        let lineno = n + 1;
        if line.is_empty() {
            continue;
        }
        let section = line
            .strip_prefix('[')
            .and_then(|rest| rest.split_once("] "))
            .ok_or_else(|| malformed(lineno, format!("expected section header, got {line:?}")))?;
        let (name, count) = section;
        let count: usize = count
            .parse()
            .map_err(|_| malformed(lineno, format!("bad row count {count:?}")))?;
        let pos = schemas
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| malformed(lineno, format!("unknown table `{name}`")))?;
        if loaded[pos].is_some() {
            return Err(malformed(lineno, format!("table `{name}` appears twice")));
        }
        let mut table = Table::new(schemas[pos].clone());
        for _ in 0..count {
            let (n, line) = lines
                .next()
                .ok_or_else(|| malformed(lineno, format!("table `{name}` is truncated")))?;
            let line = line?;
            let row = decode_row(&schemas[pos], &line).map_err(|e| malformed(n + 1, e))?;
            table.insert(row).map_err(|e| malformed(n + 1, e.to_string()))?;
        }
        loaded[pos] = Some(table);
    }
    let mut db = Database::new();
    for (schema, table) in schemas.iter().zip(loaded) {
        let table = table.ok_or_else(|| malformed(0, format!("missing table `{}`", schema.name)))?;
        db.add_table(table).map_err(|e| malformed(0, e.to_string()))?;
    }
    Ok((header, db))
}
