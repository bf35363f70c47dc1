use crate::bench::BenchError;
use crate::campus::{GenError, SnapshotError};
use crate::etl::EtlError;
use crate::reports::ReportError;
use crate::star::StarError;

/// Any failure surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Star(#[from] StarError),
    #[error(transparent)]
    Etl(#[from] EtlError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the input was rejected rather than processing failing.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Gen(e) => !matches!(e, GenError::Table(_)),
            Error::Snapshot(_) | Error::Star(_) | Error::Bench(_) => true,
            Error::Etl(e) => !matches!(e, EtlError::MultipleOpen(_) | EtlError::Table(_)),
            Error::Report(e) => !matches!(e, ReportError::Exec(_)),
            Error::Io(e) => e.kind() == std::io::ErrorKind::NotFound,
        }
    }
}
