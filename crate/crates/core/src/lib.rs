//! Star-schema derivation, constructive-merge ETL and OLTP versus warehouse
//! report benchmarking over a synthetic academic database.

pub mod bench;
pub mod campus;
mod error;
pub mod etl;
pub mod relational;
pub mod reports;
pub mod star;

pub use error::Error;
