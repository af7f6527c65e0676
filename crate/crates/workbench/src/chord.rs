//! Topic overlap graph: topics are nodes, edges count documents that belong
//! to both endpoints.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use topicbench_core::models::{DocTopics, TopicModelResult};

pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// Number of top words carried on each node.
pub const NODE_WORDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordNode {
    pub topic_id: usize,
    pub top_words: Vec<String>,
    /// Documents that belong to this topic under the graph's threshold.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChordEdge {
    pub source: usize,
    pub target: usize,
    pub shared_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordGraph {
    pub threshold: f64,
    pub nodes: Vec<ChordNode>,
    /// Sorted by `(source, target)` with `source < target`.
    pub edges: Vec<ChordEdge>,
}

/// Topics each document belongs to. Soft models use `membership ≥ threshold`;
/// hard-labelled models use the label alone, with outliers in no topic.
pub fn memberships(model: &TopicModelResult, threshold: f64) -> Vec<Vec<usize>> {
    let k = model.num_topics();
    match &model.doc_topic {
        DocTopics::Distribution { rows } => rows
            .iter()
            .map(|row| (0..k.min(row.len())).filter(|&t| row[t] >= threshold).collect())
            .collect(),
        DocTopics::Hard { labels, .. } => labels
            .iter()
            .map(|&l| if l >= 0 && (l as usize) < k { vec![l as usize] } else { vec![] })
            .collect(),
    }
}

pub fn chord_graph(model: &TopicModelResult, threshold: f64) -> ChordGraph {
    let k = model.num_topics();
    let mut sizes = vec![0usize; k];
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for topics in memberships(model, threshold) {
        for (i, &a) in topics.iter().enumerate() {
            sizes[a] += 1;
            for &b in &topics[i + 1..] {
                *shared.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }
    ChordGraph {
        threshold,
        nodes: (0..k)
            .map(|t| ChordNode {
                topic_id: model.topics[t].topic_id,
                top_words: model.top_words(t, NODE_WORDS).into_iter().map(str::to_string).collect(),
                size: sizes[t],
            })
            .collect(),
        edges: shared
            .into_iter()
            .map(|((a, b), n)| ChordEdge {
                source: model.topics[a].topic_id,
                target: model.topics[b].topic_id,
                shared_documents: n,
            })
            .collect(),
    }
}
