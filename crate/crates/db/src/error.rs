use std::io;
use std::path::Path;

pub type Result<T> = std::result::Result<T, DbError>;

#[derive(Debug, thiserror::Error)]
pub enum DbError {
    #[error(transparent)]
    Core(#[from] pir_core::Error),
    #[error("malformed {what} at line {line}, column {column}: {message}")]
    Parse { what: &'static str, line: usize, column: usize, message: String },
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("catalog line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("image data: {0}")]
    Image(String),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl DbError {
    pub fn io(context: impl AsRef<Path>, source: io::Error) -> Self {
        DbError::Io { context: context.as_ref().display().to_string(), source }
    }

    pub fn parse(what: &'static str, err: &serde_json::Error) -> Self {
        DbError::Parse { what, line: err.line(), column: err.column(), message: err.to_string() }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use pir_core::Error as E;
        match self {
            DbError::Core(E::InvalidPolygon(_) | E::DegenerateGeometry(_) | E::DegenerateRegion(_)) => "invalid_geometry",
            DbError::Core(E::InsufficientData(_)) => "insufficient_data",
            DbError::Core(E::Validation(_) | E::Alignment(_)) => "validation",
            DbError::Core(E::Lookup(_)) => "not_found",
            DbError::Core(E::Config(_)) => "config",
            DbError::Parse { .. } => "malformed_document",
            DbError::NotFound(_) => "not_found",
            DbError::Conflict(_) => "conflict",
            DbError::Corrupt { .. } => "corrupt_catalog",
            DbError::Image(_) => "invalid_image",
            DbError::Io { .. } => "io",
        }
    }
}
