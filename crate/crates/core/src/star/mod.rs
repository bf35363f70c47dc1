//! Star-schema derivation from report hypercubes.

mod derive;
mod describe;
mod spec;

pub use derive::{
    campus_warehouse, derive_from_document, derive_warehouse, eliminate_dimensions, hypercube_from_report,
    merge_snowflake, validity_fields, ChainLink, DimensionSpec, HypercubeSpec, MeasureSpec, Placement, Reason,
    StarSchema, WarehouseSchema, MEASURE_WIDTH, TGLAKHIR, TGLMULA,
};
pub use describe::describe_warehouse;
pub use spec::{
    DimensionDecl, FieldDecl, LinkDecl, MeasureDecl, MeasureFunc, ReportDecl, ReportDocument, DEFAULT_INLINE_THRESHOLD,
};

use crate::relational::SchemaError;

#[derive(Debug, thiserror::Error)]
pub enum StarError {
    #[error("report document: {0}")]
    Document(String),
    #[error("dimension `{0}` lacks cardinality metadata")]
    MissingCardinality(String),
    #[error("report `{report}` groups by unknown dimension `{dimension}`")]
    UnknownDimension { report: String, dimension: String },
    #[error("dimension `{0}` listed twice")]
    DuplicateDimension(String),
    #[error("unknown OLTP table `{0}`")]
    UnknownTable(String),
    #[error("unknown OLTP field `{0}`")]
    UnknownField(String),
    #[error("broken chain for `{dimension}`: {reason}")]
    BrokenChain { dimension: String, reason: String },
    #[error("table `{0}` derived twice with different structure")]
    NameCollision(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}
