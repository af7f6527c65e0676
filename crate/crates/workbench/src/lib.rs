//! Orchestration around `topicbench-core`: run configs and manifests, the
//! on-disk workspace, chord graphs, report export and the HTTP API.

pub mod api;
pub mod chord;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod ranking;
pub mod report;
pub mod train;
pub mod workspace;

pub use error::{Error, Result};
