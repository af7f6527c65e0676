//! Embedding-cluster topic model: embed documents, reduce with UMAP, cluster
//! by density, describe clusters with c-TF-IDF and merge near-duplicate
//! topics.

mod cluster;
mod ctfidf;
mod embedder;
mod umap;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub use cluster::{ClusterMetric, Clusterer, DensityClusterer};
pub use ctfidf::compute_ctfidf;
pub use embedder::{Embedder, EmbedderConfig, HashProjectionEmbedder, HttpEmbedder};
pub use umap::{find_ab_params, fuzzy_graph, nearest_neighbors, smooth_knn_dist, Metric, Reducer, Umap};

use super::result::{top_keywords, DocTopics, Method, Topic, TopicModelResult, OUTLIER};
use crate::error::{Error, Result};
use crate::metrics::timed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    ExcessOfMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NrTopicsMode {
    Auto,
}

/// Target topic count after clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NrTopics {
    /// Merge while some pair of topics is at least `merge_threshold` similar.
    Named(NrTopicsMode),
    /// Merge the most similar pair until at most this many topics remain.
    Count(usize),
}

impl NrTopics {
    pub const AUTO: NrTopics = NrTopics::Named(NrTopicsMode::Auto);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedClusterConfig {
    pub n_neighbors: usize,
    pub n_components: usize,
    pub min_dist: f64,
    pub reduction_metric: Metric,
    pub min_cluster_size: usize,
    pub cluster_metric: ClusterMetric,
    pub selection: Selection,
    pub nr_topics: NrTopics,
    pub merge_threshold: f64,
    pub top_k_words: usize,
    pub seed: u64,
    pub embedder: EmbedderConfig,
}

impl Default for EmbedClusterConfig {
    fn default() -> Self {
        Self {
            n_neighbors: 15,
            n_components: 5,
            min_dist: 0.0,
            reduction_metric: Metric::Cosine,
            min_cluster_size: 15,
            cluster_metric: ClusterMetric::Euclidean,
            selection: Selection::ExcessOfMass,
            nr_topics: NrTopics::AUTO,
            merge_threshold: 0.85,
            top_k_words: 10,
            seed: 42,
            embedder: EmbedderConfig::default(),
        }
    }
}

impl EmbedClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::Config("min_cluster_size must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.merge_threshold) {
            return Err(Error::Config("merge_threshold must be in [0, 1]".into()));
        }
        if self.nr_topics == NrTopics::Count(0) {
            return Err(Error::Config("nr_topics must be positive".into()));
        }
        Ok(())
    }

    pub fn reducer(&self) -> Umap {
        Umap {
            n_neighbors: self.n_neighbors,
            n_components: self.n_components,
            min_dist: self.min_dist,
            metric: self.reduction_metric,
            seed: self.seed,
            ..Umap::default()
        }
    }

    pub fn clusterer(&self) -> DensityClusterer {
        DensityClusterer {
            min_cluster_size: self.min_cluster_size,
            min_samples: None,
            metric: self.cluster_metric,
        }
    }
}

pub fn train_embed_cluster(
    doc_ids: &[String],
    texts: &[String],
    config: &EmbedClusterConfig,
    embedder: &dyn Embedder,
) -> Result<TopicModelResult> {
    train_embed_cluster_with(doc_ids, texts, config, embedder, &config.reducer(), &config.clusterer())
}

/// Same as [`train_embed_cluster`] with caller-supplied reduction and
/// clustering stages.
pub fn train_embed_cluster_with(
    doc_ids: &[String],
    texts: &[String],
    config: &EmbedClusterConfig,
    embedder: &dyn Embedder,
    reducer: &dyn Reducer,
    clusterer: &dyn Clusterer,
) -> Result<TopicModelResult> {
    config.validate()?;
    if texts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if doc_ids.len() != texts.len() {
        return Err(Error::Validation("doc id count differs from text count".into()));
    }
    let (fitted, runtime) = timed(|| fit(texts, config, embedder, reducer, clusterer))?;
    let Fitted {
        labels,
        probabilities,
        vocabulary,
        weights,
        sizes,
    } = fitted;
    let topics = weights
        .iter()
        .zip(&sizes)
        .enumerate()
        .map(|(t, (row, &size))| Topic {
            topic_id: t,
            keywords: top_keywords(row, &vocabulary, config.top_k_words),
            size,
        })
        .collect();
    Ok(TopicModelResult {
        method: Method::Embed,
        topics,
        doc_ids: doc_ids.to_vec(),
        doc_topic: DocTopics::Hard { labels, probabilities },
        vocabulary,
        topic_word: weights,
        runtime_seconds: runtime,
        config: serde_json::to_value(config).unwrap_or_default(),
        seed: config.seed,
    })
}

struct Fitted {
    labels: Vec<i64>,
    probabilities: Vec<Vec<f64>>,
    vocabulary: Vec<String>,
    weights: Vec<Vec<f64>>,
    sizes: Vec<usize>,
}

fn fit(
    texts: &[String],
    config: &EmbedClusterConfig,
    embedder: &dyn Embedder,
    reducer: &dyn Reducer,
    clusterer: &dyn Clusterer,
) -> Result<Fitted> {
    let (vocabulary, docs) = count_tokens(texts);
    let n = texts.len();

    if n < config.min_cluster_size {
        return Ok(Fitted {
            labels: vec![OUTLIER; n],
            probabilities: vec![Vec::new(); n],
            vocabulary,
            weights: Vec::new(),
            sizes: Vec::new(),
        });
    }

    let embeddings = embedder.embed(texts)?;
    if embeddings.len() != n {
        return Err(Error::Backend {
            stage: "embed",
            reason: format!("{} embeddings for {n} texts", embeddings.len()),
        });
    }
    let reduced = reducer.reduce(&embeddings)?;
    let mut labels = clusterer.cluster(&reduced)?;
    if labels.len() != n {
        return Err(Error::Backend {
            stage: "cluster",
            reason: format!("{} labels for {n} points", labels.len()),
        });
    }

    // Clusters below the size floor are treated as noise.
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &l in labels.iter().filter(|&&l| l >= 0) {
        *counts.entry(l).or_default() += 1;
    }
    for l in labels.iter_mut() {
        if *l >= 0 && counts[l] < config.min_cluster_size {
            *l = OUTLIER;
        }
    }

    merge_topics(&mut labels, &docs, vocabulary.len(), config)?;

    // Final ids: largest topic first, ties by previous label.
    let mut sizes: BTreeMap<i64, usize> = BTreeMap::new();
    for &l in labels.iter().filter(|&&l| l >= 0) {
        *sizes.entry(l).or_default() += 1;
    }
    let mut order: Vec<(i64, usize)> = sizes.into_iter().collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let remap: HashMap<i64, i64> = order.iter().enumerate().map(|(new, &(old, _))| (old, new as i64)).collect();
    for l in labels.iter_mut() {
        if *l >= 0 {
            *l = remap[l];
        }
    }
    let k = order.len();
    let weights = if k == 0 {
        Vec::new()
    } else {
        compute_ctfidf(&class_counts(&labels, &docs, k, vocabulary.len()))?
    };
    let probabilities = soft_memberships(&reduced, &labels, k);
    Ok(Fitted {
        labels,
        probabilities,
        vocabulary,
        weights,
        sizes: order.iter().map(|&(_, s)| s).collect(),
    })
}

/// Whitespace tokens with first-appearance ids.
fn count_tokens(texts: &[String]) -> (Vec<String>, Vec<Vec<(usize, f64)>>) {
    let mut words = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let docs = texts
        .iter()
        .map(|t| {
            let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
            for tok in t.split_whitespace() {
                let id = *index.entry(tok).or_insert_with(|| {
                    words.push(tok.to_string());
                    words.len() - 1
                });
                *counts.entry(id).or_default() += 1.0;
            }
            counts.into_iter().collect()
        })
        .collect();
    (words, docs)
}

fn class_counts(labels: &[i64], docs: &[Vec<(usize, f64)>], k: usize, vocab: usize) -> Vec<Vec<f64>> {
    let mut counts = vec![vec![0.0; vocab]; k];
    for (&l, doc) in labels.iter().zip(docs) {
        if l >= 0 {
            for &(id, c) in doc {
                counts[l as usize][id] += c;
            }
        }
    }
    counts
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Repeatedly folds the most similar pair of topics (by c-TF-IDF cosine) into
/// one, recomputing weights after each merge.
fn merge_topics(labels: &mut [i64], docs: &[Vec<(usize, f64)>], vocab: usize, config: &EmbedClusterConfig) -> Result<()> {
    loop {
        let mut ids: Vec<i64> = labels.iter().copied().filter(|&l| l >= 0).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() < 2 {
            return Ok(());
        }
        let dense: HashMap<i64, usize> = ids.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let dense_labels: Vec<i64> = labels
            .iter()
            .map(|l| if *l >= 0 { dense[l] as i64 } else { OUTLIER })
            .collect();
        let counts = class_counts(&dense_labels, docs, ids.len(), vocab);
        let weights = compute_ctfidf(&counts)?;

        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let s = cosine(&weights[i], &weights[j]);
                if best.is_none_or(|(bs, _, _)| s > bs) {
                    best = Some((s, i, j));
                }
            }
        }
        let (sim, i, j) = best.expect("at least two topics");
        let proceed = match config.nr_topics {
            NrTopics::Named(NrTopicsMode::Auto) => sim >= config.merge_threshold,
            NrTopics::Count(target) => ids.len() > target,
        };
        if !proceed {
            return Ok(());
        }
        let size = |d: usize| dense_labels.iter().filter(|&&l| l == d as i64).count();
        // The smaller topic is absorbed; on equal size the later one.
        let (keep, drop) = if size(j) > size(i) { (ids[j], ids[i]) } else { (ids[i], ids[j]) };
        log::debug!("merging topic {drop} into {keep} (similarity {sim:.3})");
        for l in labels.iter_mut() {
            if *l == drop {
                *l = keep;
            }
        }
    }
}

/// Membership row per document proportional to `1 / (1 + d)`, with `d` the
/// distance to each topic centroid in the reduced space.
fn soft_memberships(points: &[Vec<f64>], labels: &[i64], k: usize) -> Vec<Vec<f64>> {
    if k == 0 {
        return vec![Vec::new(); points.len()];
    }
    let dim = points.first().map_or(0, Vec::len);
    let mut centroids = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        if l >= 0 {
            sizes[l as usize] += 1;
            centroids[l as usize].iter_mut().zip(p).for_each(|(c, x)| *c += x);
        }
    }
    for (c, &s) in centroids.iter_mut().zip(&sizes) {
        c.iter_mut().for_each(|x| *x /= s.max(1) as f64);
    }
    points
        .iter()
        .map(|p| {
            let raw: Vec<f64> = centroids
                .iter()
                .map(|c| 1.0 / (1.0 + Metric::Euclidean.distance(p, c)))
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        })
        .collect()
}
