use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by population ingestion, scoring, and partitioning.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty population")]
    EmptyPopulation,

    /// A malformed cell, reported with its row (1-based data row) and column.
    #[error("row {row}, column '{column}': {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("aggregates undefined for threshold semantics")]
    AggregatesUndefined,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible team sizes: {0}")]
    Infeasible(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn cell(row: usize, column: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Cell {
            row,
            column: column.into(),
            message: message.into(),
        }
    }
}
