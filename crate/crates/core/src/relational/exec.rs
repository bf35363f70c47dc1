//! Plan execution: full scans, hash joins and group aggregation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use super::metrics::{Meter, QueryMetrics};
use super::predicate::Predicate;
use super::schema::{define_table, FieldKind, FieldSpec, SchemaError, TableSchema};
use super::table::{Database, Table, TableError};
use super::value::{Row, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("unknown field `{field}` in {context}")]
    UnknownField { field: String, context: String },
    #[error("join key `{left}` ({left_kind}) is incompatible with `{right}` ({right_kind})")]
    IncompatibleKeys {
        left: String,
        left_kind: &'static str,
        right: String,
        right_kind: &'static str,
    },
    #[error("cannot sum non-numeric field `{0}`")]
    NonNumericSum(String),
    #[error("aggregation needs at least one group field or aggregate")]
    EmptyAggregation,
    #[error("derived column `{column}`: {reason}")]
    Derive { column: String, reason: String },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// One column of an intermediate row stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub spec: FieldSpec,
    /// Base table the column was scanned from, if any.
    pub source: Option<String>,
}

impl Column {
    pub fn name(&self) -> &str {
        &self.spec.name
    }
}

/// Materialised row stream flowing between plan nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSet {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl RowSet {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name() == name)
    }

    fn require(&self, name: &str, context: &str) -> Result<usize, ExecError> {
        self.index_of(name).ok_or_else(|| ExecError::UnknownField {
            field: name.to_string(),
            context: context.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Wraps a table's rows without metering (for intermediate results).
    pub fn from_table(table: &Table) -> Self {
        Self {
            columns: table
                .schema()
                .fields
                .iter()
                .map(|f| Column {
                    spec: f.clone(),
                    source: None,
                })
                .collect(),
            rows: table.rows().to_vec(),
        }
    }

    /// Materialises the stream as an unkeyed table named `name`.
    pub fn into_table(self, name: &str) -> Result<Table, ExecError> {
        let schema = define_table(name, self.columns.into_iter().map(|c| c.spec).collect(), &[])?;
        let mut table = Table::new(schema);
        for row in self.rows {
            table.insert(row)?;
        }
        Ok(table)
    }
}

/// Full scan of `table`, keeping rows that satisfy `predicate`.
///
/// Every row is read regardless of selectivity, so the meter is charged
/// the whole table.
pub fn scan(table: &Table, predicate: &Predicate, meter: &mut Meter) -> Result<RowSet, ExecError> {
    let schema = table.schema();
    let bound = predicate
        .bind(&|name| schema.field_index(name))
        .map_err(|field| ExecError::UnknownField {
            field,
            context: format!("predicate on `{}`", schema.name),
        })?;
    meter.record_scan(&schema.name, schema.record_length, table.len());
    let rows = table.rows().iter().filter(|r| bound.eval(r)).cloned().collect();
    Ok(RowSet {
        columns: schema
            .fields
            .iter()
            .map(|f| Column {
                spec: f.clone(),
                source: Some(schema.name.clone()),
            })
            .collect(),
        rows,
    })
}

fn disambiguate(taken: &BTreeSet<String>, column: &Column) -> String {
    let prefix = column.source.as_deref().unwrap_or("right");
    let mut candidate = format!("{prefix}.{}", column.name());
    let mut n = 2;
    while taken.contains(&candidate) {
        candidate = format!("{prefix}.{}#{n}", column.name());
        n += 1;
    }
    candidate
}

/// Inner equi-join on `on` (left field, right field) pairs.
///
/// The smaller input is the build side. Output rows are left fields followed
/// by right fields; a right field whose name is already taken is renamed
/// `<source>.<name>`, so unqualified names resolve to the left input.
pub fn hash_join(left: RowSet, right: RowSet, on: &[(String, String)]) -> Result<RowSet, ExecError> {
    let mut left_keys = Vec::with_capacity(on.len());
    let mut right_keys = Vec::with_capacity(on.len());
    for (l, r) in on {
        let li = left.require(l, "join left input")?;
        let ri = right.require(r, "join right input")?;
        let (lk, rk) = (&left.columns[li].spec.kind, &right.columns[ri].spec.kind);
        if !lk.is_compatible(rk) {
            return Err(ExecError::IncompatibleKeys {
                left: l.clone(),
                left_kind: lk.label(),
                right: r.clone(),
                right_kind: rk.label(),
            });
        }
        left_keys.push(li);
        right_keys.push(ri);
    }

    let mut taken: BTreeSet<String> = left.columns.iter().map(|c| c.name().to_string()).collect();
    let mut columns = left.columns.clone();
    for col in &right.columns {
        let mut col = col.clone();
        if taken.contains(col.name()) {
            col.spec.name = disambiguate(&taken, &col);
        }
        taken.insert(col.name().to_string());
        columns.push(col);
    }

    let key = |row: &Row, idx: &[usize]| -> Vec<Value> { idx.iter().map(|&i| row[i].clone()).collect() };
    let mut rows = Vec::new();
    if left.rows.len() <= right.rows.len() {
        let mut build: HashMap<Vec<Value>, Vec<usize>> = HashMap::new();
        for (i, row) in left.rows.iter().enumerate() {
            build.entry(key(row, &left_keys)).or_default().push(i);
        }
        for r in &right.rows {
            if let Some(matches) = build.get(&key(r, &right_keys)) {
                for &i in matches {
                    let mut out = left.rows[i].clone();
                    out.extend_from_slice(r);
                    rows.push(out);
                }
            }
        }
    } else {
        let mut build: HashMap<Vec<Value>, Vec<usize>> = HashMap::new();
        for (i, row) in right.rows.iter().enumerate() {
            build.entry(key(row, &right_keys)).or_default().push(i);
        }
        for l in &left.rows {
            if let Some(matches) = build.get(&key(l, &left_keys)) {
                for &i in matches {
                    let mut out = l.clone();
                    out.extend_from_slice(&right.rows[i]);
                    rows.push(out);
                }
            }
        }
    }
    Ok(RowSet { columns, rows })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggFunc {
    Count,
    CountDistinct(String),
    Sum(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate {
    pub func: AggFunc,
    /// Output column name.
    pub name: String,
}

impl Aggregate {
    pub fn count(name: &str) -> Self {
        Self {
            func: AggFunc::Count,
            name: name.to_string(),
        }
    }

    pub fn count_distinct(field: &str, name: &str) -> Self {
        Self {
            func: AggFunc::CountDistinct(field.to_string()),
            name: name.to_string(),
        }
    }

    pub fn sum(field: &str, name: &str) -> Self {
        Self {
            func: AggFunc::Sum(field.to_string()),
            name: name.to_string(),
        }
    }
}

enum Acc {
    Count(i64),
    Distinct(usize, BTreeSet<Value>),
    Sum(usize, i64),
}

/// Groups `input` by `group_by` and computes `aggregates` per group.
///
/// Output rows are ordered lexicographically by group key. Groups exist only
/// for key combinations present in the input, so empty input yields an empty
/// table.
pub fn group_aggregate(input: RowSet, group_by: &[String], aggregates: &[Aggregate]) -> Result<Table, ExecError> {
    if group_by.is_empty() && aggregates.is_empty() {
        return Err(ExecError::EmptyAggregation);
    }
    let group_idx = group_by
        .iter()
        .map(|g| input.require(g, "group-by list"))
        .collect::<Result<Vec<_>, _>>()?;

    let mut fields: Vec<FieldSpec> = group_by
        .iter()
        .zip(&group_idx)
        .map(|(name, &i)| input.columns[i].spec.renamed(name.clone()))
        .collect();
    let mut templates = Vec::with_capacity(aggregates.len());
    for agg in aggregates {
        match &agg.func {
            AggFunc::Count => {
                fields.push(FieldSpec::integer(agg.name.clone(), 8));
                templates.push(Acc::Count(0));
            }
            AggFunc::CountDistinct(f) => {
                let i = input.require(f, "count_distinct")?;
                fields.push(FieldSpec::integer(agg.name.clone(), 8));
                templates.push(Acc::Distinct(i, BTreeSet::new()));
            }
            AggFunc::Sum(f) => {
                let i = input.require(f, "sum")?;
                let kind = &input.columns[i].spec.kind;
                if !kind.is_numeric() {
                    return Err(ExecError::NonNumericSum(f.clone()));
                }
                fields.push(FieldSpec::new(agg.name.clone(), kind.clone(), 8));
                templates.push(Acc::Sum(i, 0));
            }
        }
    }
    let sum_kinds: Vec<FieldKind> = fields[group_by.len()..].iter().map(|f| f.kind.clone()).collect();

    let fresh = || -> Vec<Acc> {
        templates
            .iter()
            .map(|t| match t {
                Acc::Count(_) => Acc::Count(0),
                Acc::Distinct(i, _) => Acc::Distinct(*i, BTreeSet::new()),
                Acc::Sum(i, _) => Acc::Sum(*i, 0),
            })
            .collect()
    };

    let mut groups: BTreeMap<Vec<Value>, Vec<Acc>> = BTreeMap::new();
    for row in &input.rows {
        let key: Vec<Value> = group_idx.iter().map(|&i| row[i].clone()).collect();
        let accs = groups.entry(key).or_insert_with(fresh);
        for acc in accs.iter_mut() {
            match acc {
                Acc::Count(n) => *n += 1,
                Acc::Distinct(i, set) => {
                    set.insert(row[*i].clone());
                }
                Acc::Sum(i, total) => {
                    *total += match &row[*i] {
                        Value::Int(v) | Value::Decimal(v) => *v,
                        other => {
                            return Err(ExecError::NonNumericSum(format!("{other}")));
                        }
                    }
                }
            }
        }
    }

    let keys: Vec<&str> = group_by.iter().map(String::as_str).collect();
    let schema: TableSchema = define_table("result", fields, &keys)?;
    let mut table = Table::new(schema);
    for (mut key, accs) in groups {
        for (acc, kind) in accs.into_iter().zip(&sum_kinds) {
            key.push(match (acc, kind) {
                (Acc::Count(n), _) => Value::Int(n),
                (Acc::Distinct(_, set), _) => Value::Int(set.len() as i64),
                (Acc::Sum(_, t), FieldKind::Decimal) => Value::Decimal(t),
                (Acc::Sum(_, t), _) => Value::Int(t),
            });
        }
        table.insert(key)?;
    }
    Ok(table)
}

/// Row-level function used by [`Plan::Derive`].
pub type ScalarFn = Arc<dyn Fn(&[&Value]) -> Result<Value, String> + Send + Sync>;

/// A tree of scan / join / aggregate nodes over a [`Database`].
#[derive(Clone)]
pub enum Plan {
    Scan {
        table: String,
        predicate: Predicate,
    },
    HashJoin {
        left: Box<Plan>,
        right: Box<Plan>,
        on: Vec<(String, String)>,
    },
    Aggregate {
        input: Box<Plan>,
        group_by: Vec<String>,
        aggregates: Vec<Aggregate>,
    },
    /// Appends a computed column.
    Derive {
        input: Box<Plan>,
        column: FieldSpec,
        args: Vec<String>,
        func: ScalarFn,
    },
}

impl fmt::Debug for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Plan::Scan { table, predicate } => f
                .debug_struct("Scan")
                .field("table", table)
                .field("predicate", predicate)
                .finish(),
            Plan::HashJoin { left, right, on } => f
                .debug_struct("HashJoin")
                .field("left", left)
                .field("right", right)
                .field("on", on)
                .finish(),
            Plan::Aggregate {
                input,
                group_by,
                aggregates,
            } => f
                .debug_struct("Aggregate")
                .field("input", input)
                .field("group_by", group_by)
                .field("aggregates", aggregates)
                .finish(),
            Plan::Derive {
                input, column, args, ..
            } => f
                .debug_struct("Derive")
                .field("input", input)
                .field("column", &column.name)
                .field("args", args)
                .finish(),
        }
    }
}

impl Plan {
    pub fn scan(table: &str) -> Self {
        Plan::Scan {
            table: table.to_string(),
            predicate: Predicate::True,
        }
    }

    pub fn scan_where(table: &str, predicate: Predicate) -> Self {
        Plan::Scan {
            table: table.to_string(),
            predicate,
        }
    }

    pub fn join(self, right: Plan, on: &[(&str, &str)]) -> Self {
        Plan::HashJoin {
            left: Box::new(self),
            right: Box::new(right),
            on: on.iter().map(|(l, r)| (l.to_string(), r.to_string())).collect(),
        }
    }

    pub fn aggregate<S: AsRef<str>>(self, group_by: &[S], aggregates: Vec<Aggregate>) -> Self {
        Plan::Aggregate {
            input: Box::new(self),
            group_by: group_by.iter().map(|g| g.as_ref().to_string()).collect(),
            aggregates,
        }
    }

    pub fn derive(self, column: FieldSpec, args: &[&str], func: ScalarFn) -> Self {
        Plan::Derive {
            input: Box::new(self),
            column,
            args: args.iter().map(|a| a.to_string()).collect(),
            func,
        }
    }

    /// Distinct base tables referenced by the plan.
    pub fn base_tables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_tables(&mut out);
        out
    }

    fn collect_tables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Plan::Scan { table, .. } => {
                out.insert(table);
            }
            Plan::HashJoin { left, right, .. } => {
                left.collect_tables(out);
                right.collect_tables(out);
            }
            Plan::Aggregate { input, .. } | Plan::Derive { input, .. } => input.collect_tables(out),
        }
    }

    fn execute(&self, db: &Database, meter: &mut Meter) -> Result<RowSet, ExecError> {
        match self {
            Plan::Scan { table, predicate } => scan(db.table(table)?, predicate, meter),
            Plan::HashJoin { left, right, on } => {
                let l = left.execute(db, meter)?;
                let r = right.execute(db, meter)?;
                hash_join(l, r, on)
            }
            Plan::Aggregate {
                input,
                group_by,
                aggregates,
            } => {
                let rows = input.execute(db, meter)?;
                Ok(RowSet::from_table(&group_aggregate(rows, group_by, aggregates)?))
            }
            Plan::Derive {
                input,
                column,
                args,
                func,
            } => {
                let mut rows = input.execute(db, meter)?;
                let idx = args
                    .iter()
                    .map(|a| rows.require(a, &format!("derive `{}`", column.name)))
                    .collect::<Result<Vec<_>, _>>()?;
                for row in &mut rows.rows {
                    let argv: Vec<&Value> = idx.iter().map(|&i| &row[i]).collect();
                    let v = func(&argv).map_err(|reason| ExecError::Derive {
                        column: column.name.clone(),
                        reason,
                    })?;
                    column.check(&v).map_err(|reason| ExecError::Derive {
                        column: column.name.clone(),
                        reason,
                    })?;
                    row.push(v);
                }
                rows.columns.push(Column {
                    spec: column.clone(),
                    source: None,
                });
                Ok(rows)
            }
        }
    }
}

/// Executes `plan` and reports its metrics.
///
/// Wall time covers execution only. An aggregate root keeps its grouped
/// schema; any other root is materialised as an unkeyed `result` table.
pub fn run_metered(db: &Database, plan: &Plan) -> Result<(Table, QueryMetrics), ExecError> {
    let mut meter = Meter::new();
    let start = Instant::now();
    let table = match plan {
        Plan::Aggregate {
            input,
            group_by,
            aggregates,
        } => {
            let rows = input.execute(db, &mut meter)?;
            group_aggregate(rows, group_by, aggregates)?
        }
        other => other.execute(db, &mut meter)?.into_table("result")?,
    };
    let elapsed = start.elapsed();
    // microsecond resolution
    let wall_time = elapsed.as_micros() as f64 / 1e6;
    let metrics = meter.finish(wall_time, table.len());
    Ok((table, metrics))
}
