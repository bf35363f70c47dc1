//! Extraction, grain transforms and constructive-merge loading.

mod classify;
mod merge;
mod pipeline;
mod source;
mod transform;

pub use classify::{classify_ips, classify_ratio, IpsCategory, IpsOutOfRange, B_ABOVE, K_BELOW};
pub use merge::{constructive_merge, current_view, open_date, LoadStats};
pub use pipeline::{
    extract_transform, run_etl, EtlMode, EtlReport, LoadedSource, TableLoad, Warehouse, WAREHOUSE_FILE,
    WAREHOUSE_FORMAT,
};
pub use source::{source_for, Source};
pub use transform::TableTransform;

use chrono::NaiveDate;

use crate::relational::io::FormatError;
use crate::relational::TableError;

#[derive(Debug, thiserror::Error)]
pub enum EtlError {
    #[error("referential gap in source data: {0}")]
    Referential(String),
    #[error("no transform for warehouse table `{0}`")]
    NoTransform(String),
    #[error("source for `{table}` lacks field `{field}`")]
    MissingSourceField { table: String, field: String },
    #[error("`{0}` has no trailing tglmula/tglakhir fields")]
    NotHistorized(String),
    #[error("load date {load_date} precedes open row of `{table}` valid since {open_since}")]
    LoadDateRegression {
        table: String,
        load_date: NaiveDate,
        open_since: NaiveDate,
    },
    #[error("`{0}` has more than one open row for a business key")]
    MultipleOpen(String),
    #[error("staged rows for `{0}` repeat a business key")]
    DuplicateStagedKey(String),
    #[error("staged row for `{table}` has {found} values, expected {expected}")]
    StagedArity {
        table: String,
        expected: usize,
        found: usize,
    },
    #[error("incompatible snapshots: {0}")]
    IncompatibleSnapshots(String),
    #[error("bad warehouse header {0:?}")]
    Header(String),
    #[error(transparent)]
    Ips(#[from] IpsOutOfRange),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Format(#[from] FormatError),
}
