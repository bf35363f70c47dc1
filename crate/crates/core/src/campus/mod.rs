//! Academic OLTP schema, synthetic data and snapshot files.

mod evolve;
mod generate;
mod integrity;
mod ips;
pub mod schema;
mod snapshot;

pub use evolve::evolve;
pub use generate::{default_snapshot_date, generate, kelas_label, GenConfig, GenError, PAPER_COUNTS, PAPER_YEARS};
pub use integrity::{referential_violations, FOREIGN_KEYS};
pub use ips::{compute_ips, grade_points};
pub use schema::{build_oltp_schema, OltpSchema, Semester, OLTP_TABLES};
pub use snapshot::{generate_snapshot, load_snapshot, snapshot, Snapshot, SnapshotError, SNAPSHOT_FORMAT};
