use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("{0} has no closed-form marginal quantile; use the large-sample oracle")]
    UnsupportedQuantile(&'static str),

    #[error("GARCH persistence alpha1 + beta1 = {0} must be below 1")]
    NonStationary(f64),

    #[error("sample scale is degenerate: standard deviation and IQR are both zero")]
    DegenerateScale,

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error(
        "kernel quantile inversion at u = {u} did not converge after {iterations} iterations \
         (last bracket [{lo}, {hi}])"
    )]
    InversionFailure {
        u: f64,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: column '{column}' not found in header")]
    MissingColumn { path: PathBuf, column: String },

    #[error("line {row}: cannot parse date '{value}' (expected YYYY-MM-DD or DD/MM/YYYY)")]
    BadDate { row: usize, value: String },

    #[error("line {row}: cannot parse close '{value}'")]
    BadPrice { row: usize, value: String },

    #[error("line {row}: close {value} is not positive")]
    NonPositivePrice { row: usize, value: f64 },

    #[error("line {row}: duplicate date {date}")]
    DuplicateDate { row: usize, date: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("report read-back mismatch: {0}")]
    ReportMismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by user input (files, columns, parameters)
    /// rather than by a numerical procedure.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::InversionFailure { .. }
                | Error::OracleFailure(_)
                | Error::DegenerateScale
                | Error::NonStationary(_)
        )
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
