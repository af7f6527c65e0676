//! C_v coherence: boolean sliding windows, NPMI context vectors and indirect
//! cosine confirmation against the whole top-word set.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::models::TopicModelResult;
use crate::preprocess::TokenSet;

pub const DEFAULT_WINDOW: usize = 110;
const EPSILON: f64 = 1e-12;

/// Window-level occurrence statistics for a fixed word list.
struct WindowCounts {
    total: f64,
    single: Vec<f64>,
    /// Row-major `n × n`; the diagonal equals `single`.
    joint: Vec<f64>,
    n: usize,
}

impl WindowCounts {
    fn p(&self, i: usize) -> f64 {
        self.single[i] / self.total
    }

    fn p_joint(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.n + j] / self.total
    }
}

/// Number of windows (start offsets `0..=last_start`) covering at least one
/// of the sorted positions.
fn windows_covering(positions: &[usize], window: usize, last_start: usize) -> usize {
    let mut covered = 0;
    let mut next_free = 0; // first start offset not yet counted
    for &p in positions {
        let lo = (p + 1).saturating_sub(window).max(next_free);
        let hi = p.min(last_start);
        if lo <= hi {
            covered += hi - lo + 1;
            next_free = hi + 1;
        }
    }
    covered
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn count_windows(words: &[String], pairs: &[(usize, usize)], docs: &[TokenSet], window: usize) -> WindowCounts {
    let n = words.len();
    let index: HashMap<&str, usize> = words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut counts = WindowCounts {
        total: 0.0,
        single: vec![0.0; n],
        joint: vec![0.0; n * n],
        n,
    };
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); n];
    for doc in docs {
        if doc.tokens.is_empty() {
            continue;
        }
        positions.iter_mut().for_each(Vec::clear);
        for (p, t) in doc.tokens.iter().enumerate() {
            if let Some(&i) = index.get(t.as_str()) {
                positions[i].push(p);
            }
        }
        let len = doc.tokens.len();
        let (w, last_start) = if len <= window { (len, 0) } else { (window, len - window) };
        counts.total += (last_start + 1) as f64;
        let covered: Vec<usize> = positions.iter().map(|ps| windows_covering(ps, w, last_start)).collect();
        for i in 0..n {
            counts.single[i] += covered[i] as f64;
            counts.joint[i * n + i] += covered[i] as f64;
        }
        for &(i, j) in pairs {
            if covered[i] == 0 || covered[j] == 0 {
                continue;
            }
            let union = windows_covering(&merge_sorted(&positions[i], &positions[j]), w, last_start);
            let both = (covered[i] + covered[j] - union) as f64;
            counts.joint[i * n + j] += both;
            counts.joint[j * n + i] += both;
        }
    }
    counts
}

fn npmi(c: &WindowCounts, i: usize, j: usize) -> f64 {
    let (pi, pj) = (c.p(i), c.p(j));
    if pi == 0.0 || pj == 0.0 {
        return 0.0;
    }
    let pij = c.p_joint(i, j) + EPSILON;
    (pij / (pi * pj)).ln() / -pij.ln()
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

/// Mean C_v coherence of the given top-word lists over a reference corpus.
pub fn coherence_cv(topics: &[Vec<String>], docs: &[TokenSet], window: usize) -> Result<f64> {
    Ok(per_topic_cv(topics, docs, window)?.iter().sum::<f64>() / topics.len() as f64)
}

/// C_v coherence of each topic.
pub fn per_topic_cv(topics: &[Vec<String>], docs: &[TokenSet], window: usize) -> Result<Vec<f64>> {
    if docs.iter().all(|d| d.tokens.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    if topics.is_empty() {
        return Err(Error::Degenerate("no topics to score".into()));
    }
    if window == 0 {
        return Err(Error::Config("window must be positive".into()));
    }
    let mut words: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut topic_ids: Vec<Vec<usize>> = Vec::with_capacity(topics.len());
    for t in topics {
        topic_ids.push(
            t.iter()
                .map(|w| {
                    *index.entry(w.clone()).or_insert_with(|| {
                        words.push(w.clone());
                        words.len() - 1
                    })
                })
                .collect(),
        );
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for ids in &topic_ids {
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                if i != j {
                    pairs.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let counts = count_windows(&words, &pairs, docs, window);

    Ok(topic_ids
        .iter()
        .map(|ids| {
            if ids.is_empty() {
                return 0.0;
            }
            let vectors: Vec<Vec<f64>> = ids
                .iter()
                .map(|&i| ids.iter().map(|&j| npmi(&counts, i, j)).collect())
                .collect();
            let mut whole = vec![0.0; ids.len()];
            for v in &vectors {
                whole.iter_mut().zip(v).for_each(|(s, x)| *s += x);
            }
            vectors.iter().map(|v| cosine(v, &whole)).sum::<f64>() / ids.len() as f64
        })
        .collect())
}

/// C_v coherence of a model's top `top_k` keywords.
pub fn topic_coherence(model: &TopicModelResult, docs: &[TokenSet], top_k: usize) -> Result<f64> {
    let topics: Vec<Vec<String>> = (0..model.num_topics())
        .map(|t| {
            let words = model.top_words(t, top_k);
            if words.len() < top_k {
                log::warn!("topic {t} has {} keywords, fewer than {top_k}", words.len());
            }
            words.into_iter().map(str::to_string).collect()
        })
        .collect();
    coherence_cv(&topics, docs, DEFAULT_WINDOW)
}
