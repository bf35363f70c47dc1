//! Minimal fixed-width row store with metered scan / hash-join / aggregate
//! execution.

mod exec;
pub mod io;
mod metrics;
mod predicate;
mod schema;
mod table;
mod value;

pub use exec::{
    group_aggregate, hash_join, run_metered, scan, AggFunc, Aggregate, Column, ExecError, Plan, RowSet, ScalarFn,
};
pub use metrics::{Meter, QueryMetrics};
pub use predicate::{BoundPredicate, CmpOp, Predicate};
pub use schema::{define_table, FieldKind, FieldSpec, SchemaError, TableSchema};
pub use table::{table_stats, Database, Table, TableError, TableStats};
pub use value::{parse_decimal, Row, Value};
