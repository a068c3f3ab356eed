use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Polygon violates the simple-polygon contract.
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    /// Geometry collapsed below the working tolerance.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Pixel mask selected no pixels.
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("lookup failed: {0}")]
    Lookup(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Sample streams that should share timestamps do not.
    #[error("misaligned samples: {0}")]
    Alignment(String),
}
