use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lda,
    Nmf,
    Embed,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Lda, Method::Nmf, Method::Embed];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lda => "lda",
            Method::Nmf => "nmf",
            Method::Embed => "embed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lda" => Ok(Method::Lda),
            "nmf" => Ok(Method::Nmf),
            "embed" | "bertopic" => Ok(Method::Embed),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub word: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub topic_id: usize,
    pub keywords: Vec<Keyword>,
    /// Documents whose dominant (or hard) assignment is this topic.
    pub size: usize,
}

/// Per-document topic memberships.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DocTopics {
    /// One row per document summing to one (LDA, normalized NMF loadings).
    Distribution { rows: Vec<Vec<f64>> },
    /// Cluster label per document (`-1` = outlier) plus soft membership rows.
    Hard {
        labels: Vec<i64>,
        probabilities: Vec<Vec<f64>>,
    },
}

impl DocTopics {
    pub fn len(&self) -> usize {
        match self {
            DocTopics::Distribution { rows } => rows.len(),
            DocTopics::Hard { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Soft membership row for one document.
    pub fn membership(&self, doc: usize) -> &[f64] {
        match self {
            DocTopics::Distribution { rows } => &rows[doc],
            DocTopics::Hard { probabilities, .. } => &probabilities[doc],
        }
    }
}

pub const OUTLIER: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModelResult {
    pub method: Method,
    pub topics: Vec<Topic>,
    pub doc_ids: Vec<String>,
    pub doc_topic: DocTopics,
    pub vocabulary: Vec<String>,
    /// Topic × vocabulary weights: word distributions for LDA, `H` for NMF,
    /// c-TF-IDF rows for the embedding path.
    pub topic_word: Vec<Vec<f64>>,
    pub runtime_seconds: f64,
    pub config: serde_json::Value,
    pub seed: u64,
}

impl TopicModelResult {
    pub fn num_topics(&self) -> usize {
        self.topics.len()
    }

    pub fn num_docs(&self) -> usize {
        self.doc_topic.len()
    }

    /// Top `k` keyword strings of a topic (fewer if the topic has fewer).
    pub fn top_words(&self, topic: usize, k: usize) -> Vec<&str> {
        self.topics[topic].keywords.iter().take(k).map(|kw| kw.word.as_str()).collect()
    }

    /// Topic-word rows rescaled to sum to one; all-zero rows become uniform.
    pub fn topic_word_distributions(&self) -> Vec<Vec<f64>> {
        self.topic_word.iter().map(|row| normalize(row)).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(file)?)
    }

    /// Checks structural invariants shared by every method.
    pub fn validate(&self) -> Result<()> {
        let k = self.topics.len();
        if self.topic_word.len() != k {
            return Err(Error::Validation(format!(
                "{} topic-word rows for {k} topics",
                self.topic_word.len()
            )));
        }
        if self.topic_word.iter().any(|r| r.len() != self.vocabulary.len()) {
            return Err(Error::Validation("topic-word row length differs from vocabulary".into()));
        }
        if self.doc_ids.len() != self.doc_topic.len() {
            return Err(Error::Validation("doc id count differs from membership rows".into()));
        }
        for t in &self.topics {
            if t.keywords.windows(2).any(|w| w[0].weight < w[1].weight) {
                return Err(Error::Validation(format!("topic {} keywords not sorted", t.topic_id)));
            }
        }
        if let DocTopics::Hard { labels, .. } = &self.doc_topic {
            if labels.iter().any(|&l| l < OUTLIER || l >= k as i64) {
                return Err(Error::Validation("label outside topic range".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn normalize(row: &[f64]) -> Vec<f64> {
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        row.iter().map(|x| x / total).collect()
    } else if row.is_empty() {
        Vec::new()
    } else {
        vec![1.0 / row.len() as f64; row.len()]
    }
}

/// Highest-weight `k` entries of a row, descending, ties by lower id.
pub(crate) fn top_keywords(row: &[f64], vocab: &[String], k: usize) -> Vec<Keyword> {
    let mut idx: Vec<usize> = (0..row.len()).filter(|&i| row[i] > 0.0).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.into_iter()
        .map(|i| Keyword {
            word: vocab[i].clone(),
            weight: row[i],
        })
        .collect()
}

/// Dominant-topic counts for distribution rows.
pub(crate) fn dominant_sizes(rows: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for row in rows {
        if let Some((best, _)) = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        {
            sizes[best] += 1;
        }
    }
    sizes
}
