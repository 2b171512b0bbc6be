//! Crate-wide error taxonomy.
//!
//! Every fallible operation in this crate returns [`Result`]. Variants are
//! deliberately specific: callers (notably the pipeline CLI) surface them as
//! per-stage failure reasons, so each message must stand on its own.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An operation received fewer observations than it can work with.
    #[error("series too short for {op}: need at least {need} observations, got {got}")]
    TooShort {
        /// Operation that rejected the input.
        op: &'static str,
        /// Minimum length required.
        need: usize,
        /// Length actually supplied.
        got: usize,
    },

    /// A dispersion estimate (variance, MAD, long-run variance) is zero, so a
    /// scale-dependent statistic is undefined.
    #[error("degenerate dispersion in {op}: {what} is zero")]
    DegenerateDispersion {
        /// Operation that hit the degenerate scale.
        op: &'static str,
        /// Which dispersion collapsed.
        what: &'static str,
    },

    /// A tuning parameter is outside its documented domain.
    #[error("invalid parameter {name}: {reason}")]
    Parameter {
        /// Parameter name as written in the API.
        name: &'static str,
        /// Why the value was rejected.
        reason: String,
    },

    /// Two inputs that must agree in shape do not.
    #[error("dimension mismatch: {what}")]
    Dimension {
        /// Human-readable description of the mismatch.
        what: String,
    },

    /// An index or date range refers outside the series span.
    #[error("out of bounds: {what}")]
    Bounds {
        /// Human-readable description of the violation.
        what: String,
    },

    /// CSV input violated the expected format.
    #[error("csv format error at line {line}: {what}")]
    CsvFormat {
        /// 1-based line number (line 1 is the header).
        line: usize,
        /// What was wrong.
        what: String,
    },

    /// Input rows were not in strictly increasing month order.
    #[error("csv sequencing error at line {line}: expected {expected}, found {found}")]
    CsvSequence {
        /// 1-based line number of the offending row.
        line: usize,
        /// Month that should have appeared.
        expected: String,
        /// Month that did appear.
        found: String,
    },

    /// Outlier repair refuses adjacent flags: the neighbour-average rule
    /// would couple the two repairs.
    #[error("adjacent outlier flags at indices {first} and {second}")]
    AdjacentFlags {
        /// Earlier flagged index.
        first: usize,
        /// The immediately following flagged index.
        second: usize,
    },

    /// Outlier repair refuses boundary flags: a first/last observation has
    /// only one neighbour.
    #[error("boundary outlier flag at index {index}")]
    BoundaryFlag {
        /// Offending index (0 or n-1).
        index: usize,
    },

    /// A moment or covariance matrix was numerically singular.
    #[error("singular matrix in {op}")]
    Singular {
        /// Operation that required the inversion/decomposition.
        op: &'static str,
    },
}
