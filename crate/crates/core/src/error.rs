use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("embedding table is missing anchor word(s): {0}")]
    MissingAnchorWords(String),

    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}{field} = {value} is outside [{min}, {max}]", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Range {
        line: Option<usize>,
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("spans overlap: {first:?} and {second:?}")]
    Overlap { first: String, second: String },

    #[error("invalid input: {0}")]
    Domain(String),

    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),

    #[error(transparent)]
    Gateway(#[from] GatewayError),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Failures talking to (or replaying) the classifier service.
#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("classifier request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },

    #[error("malformed classifier response: {0}")]
    Malformed(String),

    #[error("classifier service returned HTTP {status}: {message}")]
    Status { status: u16, message: String },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("no recorded fixture for {task} request (key {key})")]
    FixtureMiss { task: String, key: String },

    #[error("classifier gateway is disabled")]
    Disabled,

    #[error("fixture store: {0}")]
    Store(#[from] io::Error),
}
