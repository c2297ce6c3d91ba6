use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library. Every variant is a domain or input error;
/// none of them indicates a bug in the caller's environment.
#[derive(Debug, Error)]
pub enum Error {
    #[error("distribution has no positive weight")]
    EmptySupport,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("weight at index {index} is negative or not finite ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("labels and weights differ in length ({labels} vs {weights})")]
    LengthMismatch { labels: usize, weights: usize },
    #[error("invalid Zipf exponent {0}")]
    InvalidAlpha(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("empty input")]
    EmptyInput,
    #[error("enumeration of {outcomes} outcomes exceeds the limit of {limit}")]
    TooLarge { outcomes: f64, limit: u64 },
    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),
    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),
    #[error("{value} is outside the open interval (0, 1)")]
    OutOfDomain { value: f64 },
    #[error("fit window [{n_min}, {n_max}] holds {found} usable points, need at least 3")]
    InsufficientPoints { n_min: f64, n_max: f64, found: usize },
    #[error("every estimate in the fit window is saturated at 0 or 1")]
    AllSaturated,
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: header lacks required column(s) {missing}")]
    MissingHeader { path: PathBuf, missing: String },
    #[error("{0}: no rows left after cleaning")]
    EmptyAfterCleaning(PathBuf),
    #[error("malformed curve file: {0}")]
    MalformedCurve(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
