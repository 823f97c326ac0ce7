use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },

    #[error("line {line}: duplicate paper_id `{paper_id}`")]
    DuplicatePaper { line: usize, paper_id: String },

    #[error("unknown journal(s): {}", .0.join(", "))]
    UnknownJournal(Vec<String>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible plant manifest: {0}")]
    InfeasibleManifest(String),

    #[error("coupling weight is undefined when both directed weights are zero")]
    NoCouplingEdge,

    #[error("snapshot not found at {0}")]
    MissingSnapshot(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Configuration problems (bad thresholds, bad window length, bad
    /// manifest parameters) as opposed to problems with the input data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidConfig(_) | Error::InfeasibleManifest(_))
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
