use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] topicbench_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{0} not found")]
    NotFound(String),

    #[error("run {run} is missing: {}", missing.join(", "))]
    Incomplete { run: String, missing: Vec<String> },

    #[error("artifact {path} failed verification: {reason}")]
    Artifact { path: PathBuf, reason: String },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
