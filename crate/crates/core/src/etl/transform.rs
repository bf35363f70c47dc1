//! Projection and aggregation of source records onto warehouse tables.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::source::Source;
use super::EtlError;
use crate::relational::{Row, TableSchema, Value};
use crate::star::{MeasureFunc, MeasureSpec, TGLAKHIR, TGLMULA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Grain(usize),
    Measure(usize),
}

/// Computes the staged rows of one warehouse table.
///
/// A record is the grain values followed by the `of` value of every
/// measure that has one. Staged rows follow the table's field order
/// without the validity dates.
#[derive(Debug, Clone, PartialEq)]
pub struct TableTransform {
    pub table: String,
    grain: Vec<String>,
    measures: Vec<MeasureSpec>,
    layout: Vec<Slot>,
    /// Business-key positions within the grain.
    key: Vec<usize>,
    /// Positions of each measure's `of` value within a record.
    of_pos: Vec<Option<usize>>,
}

impl TableTransform {
    /// `measures` is empty for dimension tables and detail facts.
    pub fn new(schema: &TableSchema, measures: &[MeasureSpec]) -> Result<Self, EtlError> {
        let mut grain = Vec::new();
        let mut layout = Vec::new();
        for f in &schema.fields {
            if f.name == TGLMULA || f.name == TGLAKHIR {
                continue;
            }
            match measures.iter().position(|m| m.name == f.name) {
                Some(j) => layout.push(Slot::Measure(j)),
                None => {
                    layout.push(Slot::Grain(grain.len()));
                    grain.push(f.name.clone());
                }
            }
        }
        let key = schema
            .primary_key
            .iter()
            .map(|k| {
                grain
                    .iter()
                    .position(|g| g == k)
                    .ok_or_else(|| EtlError::NoTransform(format!("{}: key field {k} is a measure", schema.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut next = grain.len();
        let mut of_pos = Vec::with_capacity(measures.len());
        for m in measures {
            if !layout.contains(&Slot::Measure(of_pos.len())) {
                return Err(EtlError::NoTransform(format!(
                    "{}: no field for measure {}",
                    schema.name, m.name
                )));
            }
            match (&m.func, &m.of) {
                (MeasureFunc::Count, _) => of_pos.push(None),
                (_, Some(_)) => {
                    of_pos.push(Some(next));
                    next += 1;
                }
                (_, None) => {
                    return Err(EtlError::NoTransform(format!(
                        "{}: measure {} needs a source field",
                        schema.name, m.name
                    )))
                }
            }
        }
        Ok(Self {
            table: schema.name.clone(),
            grain,
            measures: measures.to_vec(),
            layout,
            key,
            of_pos,
        })
    }

    pub fn grain(&self) -> &[String] {
        &self.grain
    }

    /// Projects every source row onto grain and measure inputs.
    pub fn records(&self, src: &Source) -> Result<Vec<Row>, EtlError> {
        let missing = |f: &str| EtlError::MissingSourceField {
            table: self.table.clone(),
            field: f.to_string(),
        };
        let mut idx = Vec::new();
        for g in &self.grain {
            idx.push(src.index_of(g).ok_or_else(|| missing(g))?);
        }
        for (m, pos) in self.measures.iter().zip(&self.of_pos) {
            if pos.is_some() {
                let of = m.of.as_deref().expect("positioned measures have a source");
                idx.push(src.index_of(of).ok_or_else(|| missing(of))?);
            }
        }
        Ok(src
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
            .collect())
    }

    /// Business key of a record or a staged row's grain.
    pub fn record_key(&self, record: &[Value]) -> Row {
        self.key.iter().map(|&i| record[i].clone()).collect()
    }

    /// Business key of a staged row.
    pub fn staged_key(&self, row: &[Value]) -> Row {
        let grain = self.staged_grain(row);
        self.key.iter().map(|&i| grain[i].clone()).collect()
    }

    fn staged_grain<'a>(&self, row: &'a [Value]) -> Vec<&'a Value> {
        let mut grain = vec![None; self.grain.len()];
        for (slot, v) in self.layout.iter().zip(row) {
            if let Slot::Grain(i) = slot {
                grain[*i] = Some(v);
            }
        }
        grain
            .into_iter()
            .map(|v| v.expect("every grain slot laid out"))
            .collect()
    }

    /// Groups `records` by grain, keeping only groups whose key is in
    /// `scope`. Output is ordered by grain.
    pub fn stage(&self, records: &[Row], scope: Option<&HashSet<Row>>) -> Vec<Row> {
        let n = self.grain.len();
        let mut groups: BTreeMap<&[Value], Vec<&[Value]>> = BTreeMap::new();
        for r in records {
            if let Some(scope) = scope {
                if !scope.contains(&self.record_key(r)) {
                    continue;
                }
            }
            groups.entry(&r[..n]).or_default().push(&r[n..]);
        }
        groups
            .into_iter()
            .map(|(grain, inputs)| {
                let measures: Vec<Value> = self
                    .measures
                    .iter()
                    .zip(&self.of_pos)
                    .map(|(m, pos)| {
                        let args = || inputs.iter().map(|r| &r[pos.expect("checked at construction") - n]);
                        Value::Int(match m.func {
                            MeasureFunc::Count => inputs.len() as i64,
                            MeasureFunc::CountDistinct => args().collect::<HashSet<_>>().len() as i64,
                            MeasureFunc::Sum => args().map(|v| v.as_int().unwrap_or(0)).sum(),
                        })
                    })
                    .collect();
                self.layout
                    .iter()
                    .map(|slot| match *slot {
                        Slot::Grain(i) => grain[i].clone(),
                        Slot::Measure(j) => measures[j].clone(),
                    })
                    .collect()
            })
            .collect()
    }

    /// Keys of groups whose record multiset differs between `old` and `new`.
    pub fn changed_keys(&self, old: &[Row], new: &[Row]) -> HashSet<Row> {
        let mut balance: HashMap<&Row, i64> = HashMap::new();
        for r in new {
            *balance.entry(r).or_default() += 1;
        }
        for r in old {
            *balance.entry(r).or_default() -= 1;
        }
        balance
            .into_iter()
            .filter(|&(_, b)| b != 0)
            .map(|(r, _)| self.record_key(r))
            .collect()
    }
}
