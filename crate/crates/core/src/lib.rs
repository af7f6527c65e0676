//! Topic-model comparison toolkit: ingest archived subreddit dumps, clean the
//! text, train LDA / NMF / embedding-cluster models, score them and compare
//! the methods statistically.

pub mod error;
pub mod floats;
pub mod ingest;
pub mod metrics;
pub mod models;
pub mod preprocess;
pub mod stats;

pub use error::{Error, Result};
