use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the evaluation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Header is not a valid single-file NIfTI-1 header.
    #[error("malformed NIfTI header: {0}")]
    Format(String),

    #[error("unsupported volume shape: {0}")]
    UnsupportedShape(String),

    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedType(i16),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("empty cohort")]
    EmptyCohort,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("degenerate bootstrap: {skipped} of {total} resamples undefined")]
    DegenerateBootstrap { skipped: usize, total: usize },

    #[error("invalid phantom: {0}")]
    Phantom(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by statistics that cannot be computed on the
    /// given data (as opposed to bad inputs or I/O).
    pub fn is_degenerate_statistics(&self) -> bool {
        matches!(
            self,
            Error::DegenerateTable(_)
                | Error::UndefinedCorrelation(_)
                | Error::DegenerateBootstrap { .. }
                | Error::InsufficientData(_)
        )
    }
}
