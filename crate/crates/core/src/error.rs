//! Error types shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by panel construction, estimation, and simulation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A schema-required column is absent from the CSV header.
    #[error("schema error: column `{column}` not found in header")]
    MissingColumn { column: String },

    /// A y or regressor cell failed to parse as a finite number.
    #[error("parse error at data row {row}: {detail}")]
    Parse { row: usize, detail: String },

    /// Two rows share the same (unit, time) pair.
    #[error("duplicate observation for (unit `{unit}`, time `{time}`)")]
    DuplicatePair { unit: String, time: String },

    /// The long panel does not cover the full unit x time grid.
    #[error("unbalanced panel: {missing_count} missing (unit, time) cells, e.g. {examples:?}")]
    Unbalanced {
        missing_count: usize,
        /// Up to 10 missing cells, for diagnostics.
        examples: Vec<(String, String)>,
    },

    /// A panel dimension is too small for the requested operation.
    #[error("degenerate panel: need at least {required} {dimension}, found {found}")]
    DegeneratePanel {
        dimension: &'static str,
        required: usize,
        found: usize,
    },

    /// The design matrix is numerically rank deficient.
    #[error("collinear design: column {column} is linearly dependent")]
    Collinear { column: usize },

    /// Mismatched shapes between arguments.
    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    /// Lag index outside 1..=T-1.
    #[error("lag {m} out of range 1..={max}")]
    LagOutOfRange { m: usize, max: usize },

    /// Kernel weight requested beyond the truncation window.
    #[error("lag {m} exceeds kernel window floor(M) = {window}")]
    OutOfWindow { m: usize, window: usize },

    /// A parameter violated its documented domain.
    #[error("invalid parameter: {detail}")]
    InvalidParameter { detail: String },

    /// A non-finite value appeared where a finite one is required.
    #[error("non-finite value: {detail}")]
    NonFinite { detail: String },

    /// R'VR in a Wald test is not invertible.
    #[error("singular restriction: R'VR is not invertible")]
    SingularRestriction,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
