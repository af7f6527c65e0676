use std::collections::HashMap;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps documents to fixed-dimension vectors.
pub trait Embedder {
    fn dimension(&self) -> usize;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
}

/// Deterministic embedder for tests and offline runs: each token gets a seeded
/// random direction; a document is the L2-normalized count-weighted sum.
#[derive(Debug, Clone)]
pub struct HashProjectionEmbedder {
    dim: usize,
    seed: u64,
}

impl HashProjectionEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed }
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(token.as_bytes()) ^ self.seed);
        (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl Embedder for HashProjectionEmbedder {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let mut cache: HashMap<&str, Vec<f64>> = HashMap::new();
        Ok(texts
            .iter()
            .map(|text| {
                let mut v = vec![0.0; self.dim];
                for tok in text.split_whitespace() {
                    let tv = cache.entry(tok).or_insert_with(|| self.token_vector(tok));
                    v.iter_mut().zip(tv.iter()).for_each(|(a, b)| *a += b);
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.iter_mut().for_each(|x| *x /= norm);
                }
                v
            })
            .collect())
    }
}

/// Client for an external sentence-embedding service.
///
/// Sends `{"texts": [...]}` and expects `{"embeddings": [[...], ...]}`.
#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    url: String,
    dim: usize,
    batch_size: usize,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

impl HttpEmbedder {
    pub fn new(url: impl Into<String>, dim: usize, batch_size: usize) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| Error::Backend {
                stage: "embed",
                reason: e.to_string(),
            })?;
        Ok(Self {
            url: url.into(),
            dim,
            batch_size: batch_size.max(1),
            client,
        })
    }
}

impl Embedder for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let backend = |reason: String| Error::Backend { stage: "embed", reason };
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size) {
            let resp: EmbedResponse = self
                .client
                .post(&self.url)
                .json(&EmbedRequest { texts: chunk })
                .send()
                .and_then(|r| r.error_for_status())
                .and_then(|r| r.json())
                .map_err(|e| backend(e.to_string()))?;
            if resp.embeddings.len() != chunk.len() {
                return Err(backend(format!(
                    "{} embeddings returned for {} texts",
                    resp.embeddings.len(),
                    chunk.len()
                )));
            }
            if let Some(bad) = resp.embeddings.iter().find(|e| e.len() != self.dim) {
                return Err(backend(format!("expected dimension {}, got {}", self.dim, bad.len())));
            }
            out.extend(resp.embeddings);
        }
        Ok(out)
    }
}

/// Embedder selection as written in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EmbedderConfig {
    HashProjection {
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default)]
        seed: u64,
    },
    Http {
        url: String,
        dimension: usize,
        #[serde(default = "default_batch")]
        batch_size: usize,
    },
}

fn default_dim() -> usize {
    64
}

fn default_batch() -> usize {
    64
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig::HashProjection {
            dim: default_dim(),
            seed: 0,
        }
    }
}

impl EmbedderConfig {
    pub fn build(&self) -> Result<Box<dyn Embedder + Send + Sync>> {
        Ok(match self {
            EmbedderConfig::HashProjection { dim, seed } => Box::new(HashProjectionEmbedder::new(*dim, *seed)),
            EmbedderConfig::Http {
                url,
                dimension,
                batch_size,
            } => Box::new(HttpEmbedder::new(url.clone(), *dimension, *batch_size)?),
        })
    }
}
