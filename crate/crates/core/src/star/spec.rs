//! Declarative report and dimension document (TOML).

use serde::{Deserialize, Serialize};

use crate::relational::{FieldKind, FieldSpec};

use super::StarError;

pub const DEFAULT_INLINE_THRESHOLD: u64 = 8;

fn default_threshold() -> u64 {
    DEFAULT_INLINE_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    #[serde(default = "default_threshold")]
    pub inline_threshold: u64,
    #[serde(default, rename = "dimension")]
    pub dimensions: Vec<DimensionDecl>,
    #[serde(default, rename = "report")]
    pub reports: Vec<ReportDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionDecl {
    pub name: String,
    pub cardinality: Option<u64>,
    #[serde(default)]
    pub display_only: bool,
    /// Warehouse table name used when the dimension is kept.
    pub table: Option<String>,
    /// Foreign-key path from the head table; empty for derived dimensions.
    #[serde(default)]
    pub chain: Vec<LinkDecl>,
    /// Field definitions of a derived dimension.
    #[serde(default)]
    pub derived: Vec<FieldDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDecl {
    pub table: String,
    /// Field of an earlier link referencing this table's key.
    pub via: Option<String>,
    pub attributes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDecl {
    pub name: String,
    pub kind: String,
    pub width: usize,
    #[serde(default)]
    pub values: Vec<String>,
}

impl FieldDecl {
    pub fn to_field(&self) -> Result<FieldSpec, StarError> {
        let kind = match self.kind.as_str() {
            "text" => FieldKind::Text,
            "integer" => FieldKind::Integer,
            "decimal" => FieldKind::Decimal,
            "date" => FieldKind::Date,
            "enum" => FieldKind::Enum(self.values.clone()),
            other => {
                return Err(StarError::Document(format!(
                    "field `{}` has unknown kind `{other}`",
                    self.name
                )))
            }
        };
        Ok(FieldSpec::new(self.name.clone(), kind, self.width))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureFunc {
    Count,
    CountDistinct,
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDecl {
    pub name: String,
    pub func: MeasureFunc,
    pub of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDecl {
    pub id: u32,
    pub name: String,
    pub title: String,
    pub fact: String,
    #[serde(default)]
    pub group_by: Vec<String>,
    #[serde(default)]
    pub measures: Vec<MeasureDecl>,
    /// `TABLE.field` columns listed per fact row without grouping.
    #[serde(default)]
    pub detail: Vec<String>,
}

const CAMPUS_REPORTS: &str = include_str!("../../assets/campus_reports.toml");

impl ReportDocument {
    pub fn from_toml(text: &str) -> Result<Self, StarError> {
        toml::from_str(text).map_err(|e| StarError::Document(e.to_string()))
    }

    /// The five campus reports with their dimension metadata.
    pub fn campus() -> Self {
        Self::from_toml(CAMPUS_REPORTS).expect("bundled report document parses")
    }

    pub fn source_text() -> &'static str {
        CAMPUS_REPORTS
    }

    pub fn dimension(&self, name: &str) -> Option<&DimensionDecl> {
        self.dimensions.iter().find(|d| d.name == name)
    }

    pub fn report(&self, id: u32) -> Option<&ReportDecl> {
        self.reports.iter().find(|r| r.id == id)
    }
}
