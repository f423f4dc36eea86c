//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Errors are grouped into broad
//! categories (see [`Error::category`]) so the command-line frontend can emit a
//! single `error: <category>: <message>` line without matching on variants.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid kernel parameter: {0}")]
    InvalidKernel(String),

    #[error("cannot parse kernel spec `{input}`: {reason}")]
    KernelParse { input: String, reason: String },

    #[error("pixel value {value} at index {index} outside [0, 1]")]
    PixelRange { index: usize, value: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: max |S - S^T| entry is {deviation:e}")]
    NotSymmetric { deviation: f64 },

    #[error("eigendecomposition did not converge within {max_iterations} iterations")]
    EigenConvergence { max_iterations: usize },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} (clip tolerance {tolerance:e})")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("requested {requested} components but only {available} are available")]
    TooManyComponents { requested: usize, available: usize },

    #[error("{what} residual {residual:e} exceeds bound {bound:e}")]
    ResidualCheck {
        what: &'static str,
        residual: f64,
        bound: f64,
    },

    #[error("need at least two distinct classes, found {found}")]
    SingleClass { found: usize },

    #[error("singular within-class scatter; set reg_gamma > 0")]
    SingularScatter,

    #[error("class {label} has {available} samples, need {needed}")]
    InsufficientClassSamples {
        label: u32,
        available: usize,
        needed: usize,
    },

    #[error("dataset has no labels, but the operation requires them")]
    MissingLabels,

    #[error("label count {labels} does not match sample count {samples}")]
    LabelCountMismatch { labels: usize, samples: usize },

    #[error("{path}: bad magic number: expected {expected:#010x}, found {found:#010x}")]
    IdxBadMagic {
        path: String,
        expected: u32,
        found: u32,
    },

    #[error("{path}: file is truncated")]
    IdxTruncated { path: String },

    #[error("image count {images} does not match label count {labels}")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error("{path}:{line}: {reason}")]
    ParseFile {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("unsupported archive header `{found}`, expected `{expected}`")]
    ArchiveMagic {
        expected: &'static str,
        found: String,
    },

    #[error("archive references training data with fingerprint {expected}, recomputed {found}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    /// Coarse grouping used by the CLI for its one-line error reports.
    pub fn category(&self) -> &'static str {
        use Error::*;
        match self {
            DimensionMismatch { .. } | NotSquare { .. } => "dimension",
            InvalidKernel(_) | KernelParse { .. } | PixelRange { .. } => "kernel",
            NonFinite { .. } | InvalidInput(_) => "input",
            NotSymmetric { .. }
            | EigenConvergence { .. }
            | NotPsd { .. }
            | ResidualCheck { .. }
            | TooManyComponents { .. } => "linalg",
            SingleClass { .. }
            | SingularScatter
            | InsufficientClassSamples { .. }
            | MissingLabels
            | LabelCountMismatch { .. } => "labels",
            IdxBadMagic { .. }
            | IdxTruncated { .. }
            | IdxCountMismatch { .. }
            | ParseFile { .. }
            | ArchiveMagic { .. }
            | FingerprintMismatch { .. } => "format",
            Io { .. } => "io",
        }
    }

    /// Attach a path to a raw I/O error.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
