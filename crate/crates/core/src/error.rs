use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("histogram mass {mass} deviates from 1 by more than {tolerance}")]
    MassDeviation { mass: f64, tolerance: f64 },

    #[error("matrix is not symmetric at ({row},{col}): {lower} vs {upper}")]
    Asymmetric {
        row: usize,
        col: usize,
        lower: f64,
        upper: f64,
    },

    #[error("nonzero diagonal entry {value} at index {index}")]
    NonzeroDiagonal { index: usize, value: f64 },

    #[error("off-diagonal entry ({row},{col}) = {value} must be strictly positive")]
    NotStrictlyPositive { row: usize, col: usize, value: f64 },

    #[error("coupling {which} marginal deviates by {violation} (limit {tolerance})")]
    MarginalViolation {
        which: &'static str,
        violation: f64,
        tolerance: f64,
    },

    #[error("histograms {first} and {second} are identical; pairwise-distinct input required")]
    DuplicateHistograms { first: usize, second: usize },

    #[error("transport solver exceeded {iterations} pivots without reaching optimality")]
    SolverStall { iterations: usize },

    #[error(
        "scaling iteration stopped after {iterations} sweeps with marginal violation {violation} (tolerance {tolerance})"
    )]
    ScalingCap {
        iterations: usize,
        violation: f64,
        tolerance: f64,
    },

    #[error("numerical overflow in kernel scaling; rerun with log_domain = true")]
    ScalingOverflow,

    #[error("matrix has an all-zero {which} at index {index}")]
    ZeroMarginal { which: &'static str, index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("exhaustive oracle supports at most 5 bins per side, got {rows}x{cols}")]
    OracleTooLarge { rows: usize, cols: usize },

    #[error("template degenerates to a constant profile; histograms would coincide")]
    DegenerateTemplate,

    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("expected integer counts, found {value} at ({row},{col})")]
    NonIntegerCount { row: usize, col: usize, value: f64 },

    #[error("top_k = {top_k} exceeds the number of genes ({genes})")]
    TopKTooLarge { top_k: usize, genes: usize },

    #[error("eigen solver failure: {0}")]
    EigenFailure(String),

    #[error("{path}:{line}:{column}: {message}")]
    CsvParse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: bad idx magic 0x{found:08x}")]
    IdxMagic { path: String, found: u32 },

    #[error("{path}: idx payload truncated at byte {offset}: expected {expected} bytes, found {actual}")]
    IdxTruncated {
        path: String,
        offset: usize,
        expected: usize,
        actual: usize,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
