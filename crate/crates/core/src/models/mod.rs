//! Topic-model trainers and their shared result type.

pub mod embed;
pub mod lda;
pub mod nmf;
pub mod result;
pub mod select;
pub mod sparse;
pub mod vocab;

pub use embed::{train_embed_cluster, EmbedClusterConfig, Embedder, EmbedderConfig, HashProjectionEmbedder};
pub use lda::{train_lda, Eta, LdaConfig};
pub use nmf::{train_nmf, NmfConfig};
pub use result::{DocTopics, Keyword, Method, Topic, TopicModelResult, OUTLIER};
pub use select::{choose_topics_by_coherence, choose_topics_median, default_grid, MedianSelection, SweepSelection};
pub use sparse::CsrMatrix;
pub use vocab::{BowCorpus, Vocabulary};
