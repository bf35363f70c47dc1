//! Hypercube construction, dimension elimination and warehouse derivation.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::spec::{DimensionDecl, MeasureFunc, ReportDecl, ReportDocument};
use super::StarError;
use crate::campus::OltpSchema;
use crate::relational::{define_table, FieldSpec, TableSchema};

pub const TGLMULA: &str = "tglmula";
pub const TGLAKHIR: &str = "tglakhir";
pub const MEASURE_WIDTH: usize = 4;

pub fn validity_fields() -> [FieldSpec; 2] {
    [FieldSpec::date(TGLMULA, 10), FieldSpec::date(TGLAKHIR, 10)]
}

/// One table of a dimension's foreign-key path, attributes resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub table: String,
    pub via: Option<String>,
    pub attributes: Vec<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionSpec {
    pub name: String,
    pub attributes: Vec<FieldSpec>,
    pub cardinality: Option<u64>,
    /// Empty for derived dimensions.
    pub source_tables: Vec<ChainLink>,
    pub display_only: bool,
    pub table_name: Option<String>,
}

impl DimensionSpec {
    pub fn is_derived(&self) -> bool {
        self.source_tables.is_empty()
    }

    fn warehouse_table(&self) -> String {
        self.table_name
            .clone()
            .unwrap_or_else(|| format!("W{}", self.name.to_uppercase()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    pub name: String,
    pub func: MeasureFunc,
    pub of: Option<String>,
}

impl MeasureSpec {
    pub fn field(&self) -> FieldSpec {
        FieldSpec::integer(self.name.clone(), MEASURE_WIDTH)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeSpec {
    pub report_id: u32,
    pub report_name: String,
    pub fact_name: String,
    pub measures: Vec<MeasureSpec>,
    pub dimensions: Vec<DimensionSpec>,
    /// Per-row listing fields; non-empty marks a detail hypercube.
    pub detail: Vec<FieldSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    LowCardinality,
    SingleAttribute,
    DisplayOnly,
}

impl Reason {
    pub fn code(self) -> &'static str {
        match self {
            Reason::LowCardinality => "low_cardinality",
            Reason::SingleAttribute => "single_attribute",
            Reason::DisplayOnly => "display_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    /// Kept as a dimension table referenced by `foreign_key` on the fact.
    DimTable { table: String, foreign_key: String },
    /// Eliminated; its attributes are fact fields.
    Inline { reason: Reason, fields: Vec<String> },
    /// Eliminated; its attributes already live in a kept dimension table.
    Absorbed { reason: Reason, into: String },
}

impl Placement {
    pub fn reason(&self) -> Option<Reason> {
        match self {
            Placement::DimTable { .. } => None,
            Placement::Inline { reason, .. } | Placement::Absorbed { reason, .. } => Some(*reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarSchema {
    pub report_id: u32,
    pub report_name: String,
    /// Historized: primary key is the business key, duplicates allowed.
    pub fact: TableSchema,
    pub measures: Vec<MeasureSpec>,
    pub dims: Vec<TableSchema>,
    /// Hypercube dimension order.
    pub placements: Vec<(String, Placement)>,
}

impl StarSchema {
    pub fn eliminated(&self) -> BTreeMap<&str, Reason> {
        self.placements
            .iter()
            .filter_map(|(name, p)| p.reason().map(|r| (name.as_str(), r)))
            .collect()
    }

    pub fn fact_key(&self) -> &[String] {
        &self.fact.primary_key
    }

    pub fn placement(&self, dimension: &str) -> Option<&Placement> {
        self.placements.iter().find(|(n, _)| n == dimension).map(|(_, p)| p)
    }
}

fn catalog_table<'a>(catalog: &'a OltpSchema, name: &str) -> Result<&'a TableSchema, StarError> {
    catalog
        .table(name)
        .ok_or_else(|| StarError::UnknownTable(name.to_string()))
}

fn catalog_field(catalog: &OltpSchema, table: &str, field: &str) -> Result<FieldSpec, StarError> {
    catalog_table(catalog, table)?
        .field(field)
        .cloned()
        .ok_or_else(|| StarError::UnknownField(format!("{table}.{field}")))
}

/// Verifies every link after the head is reachable from an earlier link
/// through `via` onto the link table's single-field key.
fn check_chain(name: &str, chain: &[ChainLink], catalog: &OltpSchema) -> Result<(), StarError> {
    let broken = |reason: String| StarError::BrokenChain {
        dimension: name.to_string(),
        reason,
    };
    let head = chain.first().ok_or_else(|| broken("chain is empty".into()))?;
    catalog_table(catalog, &head.table)?;
    for (i, link) in chain.iter().enumerate().skip(1) {
        let via = link
            .via
            .as_deref()
            .ok_or_else(|| broken(format!("{} has no link field", link.table)))?;
        let mut from = None;
        for earlier in chain[..i].iter().rev() {
            if let Some(f) = catalog_table(catalog, &earlier.table)?.field(via) {
                from = Some((earlier.table.as_str(), f));
                break;
            }
        }
        let (from_table, from) =
            from.ok_or_else(|| broken(format!("no earlier table has field `{via}` for {}", link.table)))?;
        let target = catalog_table(catalog, &link.table)?;
        let [key] = target.primary_key.as_slice() else {
            return Err(broken(format!("{} has no single-field key", link.table)));
        };
        let key = target.field(key).expect("key fields exist");
        if !from.kind.is_compatible(&key.kind) {
            return Err(broken(format!(
                "{from_table}.{via} does not match key {}.{}",
                link.table, key.name
            )));
        }
    }
    Ok(())
}

fn resolve_dimension(decl: &DimensionDecl, catalog: &OltpSchema) -> Result<DimensionSpec, StarError> {
    let mut chain = Vec::with_capacity(decl.chain.len());
    for link in &decl.chain {
        let attributes = link
            .attributes
            .iter()
            .map(|a| catalog_field(catalog, &link.table, a))
            .collect::<Result<Vec<_>, _>>()?;
        chain.push(ChainLink {
            table: link.table.clone(),
            via: link.via.clone(),
            attributes,
        });
    }
    let attributes = if chain.is_empty() {
        decl.derived
            .iter()
            .map(|f| f.to_field())
            .collect::<Result<Vec<_>, _>>()?
    } else {
        check_chain(&decl.name, &chain, catalog)?;
        chain.iter().flat_map(|l| l.attributes.iter().cloned()).collect()
    };
    if attributes.is_empty() {
        return Err(StarError::Document(format!(
            "dimension `{}` has no attributes",
            decl.name
        )));
    }
    Ok(DimensionSpec {
        name: decl.name.clone(),
        attributes,
        cardinality: decl.cardinality,
        source_tables: chain,
        display_only: decl.display_only,
        table_name: decl.table.clone(),
    })
}

/// One dimension per grouping entry; measures and detail fields carried through.
pub fn hypercube_from_report(
    doc: &ReportDocument,
    report: &ReportDecl,
    catalog: &OltpSchema,
) -> Result<HypercubeSpec, StarError> {
    let mut seen = BTreeSet::new();
    let mut dimensions = Vec::with_capacity(report.group_by.len());
    for name in &report.group_by {
        if !seen.insert(name.as_str()) {
            return Err(StarError::DuplicateDimension(name.clone()));
        }
        let decl = doc.dimension(name).ok_or_else(|| StarError::UnknownDimension {
            report: report.name.clone(),
            dimension: name.clone(),
        })?;
        dimensions.push(resolve_dimension(decl, catalog)?);
    }
    let detail = report
        .detail
        .iter()
        .map(|d| {
            let (table, field) = d
                .split_once('.')
                .ok_or_else(|| StarError::Document(format!("detail `{d}` is not TABLE.field")))?;
            catalog_field(catalog, table, field)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let measures = report
        .measures
        .iter()
        .map(|m| MeasureSpec {
            name: m.name.clone(),
            func: m.func,
            of: m.of.clone(),
        })
        .collect::<Vec<_>>();
    if measures.is_empty() && detail.is_empty() && dimensions.is_empty() {
        return Err(StarError::Document(format!(
            "report `{}` has neither measures, dimensions nor detail fields",
            report.name
        )));
    }
    Ok(HypercubeSpec {
        report_id: report.id,
        report_name: report.name.clone(),
        fact_name: report.fact.clone(),
        measures,
        dimensions,
        detail,
    })
}

/// Flattens a foreign-key chain into one historized table keyed by the
/// chain head's key.
pub fn merge_snowflake(name: &str, chain: &[ChainLink], catalog: &OltpSchema) -> Result<TableSchema, StarError> {
    check_chain(name, chain, catalog)?;
    let head = catalog_table(catalog, &chain[0].table)?;
    let key = head.primary_key.clone();
    let mut fields: Vec<FieldSpec> = Vec::new();
    for k in &key {
        if !chain[0].attributes.iter().any(|a| &a.name == k) {
            fields.push(head.field(k).expect("key fields exist").clone());
        }
    }
    for link in chain {
        fields.extend(link.attributes.iter().cloned());
    }
    fields.extend(validity_fields());
    let key: Vec<&str> = key.iter().map(String::as_str).collect();
    Ok(define_table(name, fields, &key)?.historized())
}

fn elimination_reason(d: &DimensionSpec, threshold: u64) -> Result<Option<Reason>, StarError> {
    let cardinality = d
        .cardinality
        .ok_or_else(|| StarError::MissingCardinality(d.name.clone()))?;
    Ok(if cardinality <= threshold {
        Some(Reason::LowCardinality)
    } else if d.attributes.len() == 1 {
        Some(Reason::SingleAttribute)
    } else if d.display_only {
        Some(Reason::DisplayOnly)
    } else {
        None
    })
}

/// Applies the three elimination rules and merges kept snowflake chains.
pub fn eliminate_dimensions(
    cube: &HypercubeSpec,
    inline_threshold: u64,
    catalog: &OltpSchema,
) -> Result<StarSchema, StarError> {
    let reasons = cube
        .dimensions
        .iter()
        .map(|d| elimination_reason(d, inline_threshold))
        .collect::<Result<Vec<_>, _>>()?;

    let mut kept: Vec<(&DimensionSpec, TableSchema)> = Vec::new();
    for (d, reason) in cube.dimensions.iter().zip(&reasons) {
        if reason.is_none() {
            if d.is_derived() {
                return Err(StarError::BrokenChain {
                    dimension: d.name.clone(),
                    reason: "a derived dimension cannot become a table".into(),
                });
            }
            kept.push((d, merge_snowflake(&d.warehouse_table(), &d.source_tables, catalog)?));
        }
    }

    let mut fields: Vec<FieldSpec> = Vec::new();
    let mut key: Vec<String> = Vec::new();
    let mut placements = Vec::with_capacity(cube.dimensions.len());
    for (d, reason) in cube.dimensions.iter().zip(reasons) {
        let placement = match reason {
            None => {
                let (_, table) = kept.iter().find(|(k, _)| k.name == d.name).expect("kept above");
                let fk = table.primary_key[0].clone();
                fields.push(table.field(&fk).expect("key field").clone());
                key.push(fk.clone());
                Placement::DimTable {
                    table: table.name.clone(),
                    foreign_key: fk,
                }
            }
            Some(reason) => {
                let host = (!d.is_derived())
                    .then(|| {
                        kept.iter().find(|(k, table)| {
                            d.source_tables
                                .iter()
                                .all(|l| k.source_tables.iter().any(|kl| kl.table == l.table))
                                && d.attributes.iter().all(|a| table.field(&a.name) == Some(a))
                        })
                    })
                    .flatten();
                match host {
                    Some((_, table)) => Placement::Absorbed {
                        reason,
                        into: table.name.clone(),
                    },
                    None => {
                        let keyed = if d.display_only { 1 } else { d.attributes.len() };
                        for (i, a) in d.attributes.iter().enumerate() {
                            // An attribute shared with an earlier inlined dimension is stored once.
                            if fields.contains(a) {
                                continue;
                            }
                            fields.push(a.clone());
                            if i < keyed {
                                key.push(a.name.clone());
                            }
                        }
                        Placement::Inline {
                            reason,
                            fields: d.attributes.iter().map(|a| a.name.clone()).collect(),
                        }
                    }
                }
            }
        };
        placements.push((d.name.clone(), placement));
    }
    for f in &cube.detail {
        fields.push(f.clone());
        key.push(f.name.clone());
    }
    fields.extend(cube.measures.iter().map(MeasureSpec::field));
    fields.extend(validity_fields());
    let key_refs: Vec<&str> = key.iter().map(String::as_str).collect();
    let fact = define_table(&cube.fact_name, fields, &key_refs)?.historized();
    Ok(StarSchema {
        report_id: cube.report_id,
        report_name: cube.report_name.clone(),
        fact,
        measures: cube.measures.clone(),
        dims: kept.into_iter().map(|(_, t)| t).collect(),
        placements,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarehouseSchema {
    pub facts: Vec<StarSchema>,
    /// Structurally deduplicated dimension tables, first-use order.
    pub shared_dims: Vec<TableSchema>,
}

impl WarehouseSchema {
    /// Dimension tables first, then fact tables in report order.
    pub fn tables(&self) -> Vec<&TableSchema> {
        let mut out: Vec<&TableSchema> = self.shared_dims.iter().collect();
        for star in &self.facts {
            if !out.iter().any(|t| t.name == star.fact.name) {
                out.push(&star.fact);
            }
        }
        out
    }

    pub fn table(&self, name: &str) -> Option<&TableSchema> {
        self.tables().into_iter().find(|t| t.name == name)
    }

    pub fn star(&self, report_id: u32) -> Option<&StarSchema> {
        self.facts.iter().find(|s| s.report_id == report_id)
    }

    /// Fact tables referencing dimension table `name`.
    pub fn dim_users(&self, name: &str) -> Vec<&str> {
        self.facts
            .iter()
            .filter(|s| s.dims.iter().any(|d| d.name == name))
            .map(|s| s.fact.name.as_str())
            .collect()
    }

    pub fn total_record_length(&self) -> usize {
        self.tables().iter().map(|t| t.record_length).sum()
    }
}

/// Combines star schemas, sharing dimension tables with identical structure.
pub fn derive_warehouse(stars: Vec<StarSchema>) -> Result<WarehouseSchema, StarError> {
    if stars.is_empty() {
        return Err(StarError::Document("no star schemas to combine".into()));
    }
    let mut by_name: BTreeMap<String, TableSchema> = BTreeMap::new();
    let mut shared_dims: Vec<TableSchema> = Vec::new();
    for star in &stars {
        let tables = star.dims.iter().map(|d| (d, true)).chain([(&star.fact, false)]);
        for (table, is_dim) in tables {
            match by_name.get(&table.name) {
                Some(existing) if existing == table => {}
                Some(_) => return Err(StarError::NameCollision(table.name.clone())),
                None => {
                    by_name.insert(table.name.clone(), table.clone());
                    if is_dim {
                        shared_dims.push(table.clone());
                    }
                }
            }
        }
    }
    Ok(WarehouseSchema {
        facts: stars,
        shared_dims,
    })
}

/// Runs the whole derivation over every report of `doc`.
pub fn derive_from_document(
    doc: &ReportDocument,
    catalog: &OltpSchema,
    inline_threshold: Option<u64>,
) -> Result<WarehouseSchema, StarError> {
    let threshold = inline_threshold.unwrap_or(doc.inline_threshold);
    let stars = doc
        .reports
        .iter()
        .map(|r| eliminate_dimensions(&hypercube_from_report(doc, r, catalog)?, threshold, catalog))
        .collect::<Result<Vec<_>, _>>()?;
    derive_warehouse(stars)
}

/// The campus warehouse derived from the bundled report document.
pub fn campus_warehouse() -> WarehouseSchema {
    derive_from_document(&ReportDocument::campus(), &crate::campus::build_oltp_schema(), None)
        .expect("bundled document derives")
}
