//! Synthetic corpora and fixture tables for the acceptance checks.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde_json::json;
use topicbench_core::preprocess::TokenSet;

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn dirichlet(rng: &mut ChaCha8Rng, alpha: &[f64]) -> Vec<f64> {
    let draws: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

fn sample_index(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

pub struct PlantedCorpus {
    pub docs: Vec<TokenSet>,
    /// Topic × vocabulary distributions over words `w0..w{V-1}`.
    pub topics: Vec<Vec<f64>>,
}

/// Documents drawn from `k` topics with disjoint vocabularies of equal size.
pub fn planted_lda_corpus(n_docs: usize, vocab: usize, k: usize, seed: u64) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = vocab / k;
    let topics: Vec<Vec<f64>> = (0..k)
        .map(|t| {
            let weights = dirichlet(&mut rng, &vec![2.0; block]);
            let mut row = vec![0.0; vocab];
            row[t * block..(t + 1) * block].copy_from_slice(&weights);
            row
        })
        .collect();
    let docs = (0..n_docs)
        .map(|d| {
            let theta = dirichlet(&mut rng, &vec![0.3; k]);
            let len = rng.random_range(40..80);
            let tokens = (0..len)
                .map(|_| {
                    let t = sample_index(&mut rng, &theta);
                    format!("w{}", sample_index(&mut rng, &topics[t]))
                })
                .collect();
            TokenSet::new(format!("d{d}"), tokens)
        })
        .collect();
    PlantedCorpus { docs, topics }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Greedy one-to-one matching by descending cosine; returns matched scores.
pub fn greedy_match(planted: &[Vec<f64>], recovered: &[Vec<f64>]) -> Vec<f64> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in planted.iter().enumerate() {
        for (j, r) in recovered.iter().enumerate() {
            pairs.push((cosine(p, r), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut used_p, mut used_r) = (vec![false; planted.len()], vec![false; recovered.len()]);
    let mut out = Vec::new();
    for (c, i, j) in pairs {
        if !used_p[i] && !used_r[j] {
            used_p[i] = true;
            used_r[j] = true;
            out.push(c);
        }
    }
    out
}

/// Three groups of documents, each dominated by its own marker token.
pub fn blob_texts(per_blob: usize, seed: u64) -> (Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = Vec::new();
    let mut texts = Vec::new();
    for b in 0..3 {
        for i in 0..per_blob {
            let mut toks = vec![format!("marker{b}"); 3];
            for _ in 0..5 {
                toks.push(format!("blob{b}term{}", rng.random_range(0..20)));
            }
            ids.push(format!("b{b}-{i}"));
            texts.push(toks.join(" "));
        }
    }
    (ids, texts)
}

/// Raw submission and comment records: `n` submissions, `m` comments of which
/// the last points at a missing submission. Comments are emitted out of time
/// order.
pub fn dump_records(n: usize, m: usize) -> (Vec<serde_json::Value>, Vec<serde_json::Value>) {
    let subs = (0..n)
        .map(|i| {
            json!({
                "id": format!("s{i}"),
                "title": format!("title {i}"),
                "selftext": format!("body {i}"),
                "created_utc": 1_600_000_000 + i as i64 * 100,
                "subreddit": "fixture"
            })
        })
        .collect();
    let coms = (0..m)
        .map(|j| {
            let link = if j + 1 == m { "t3_missing".to_string() } else { format!("t3_s{}", j % n) };
            json!({
                "id": format!("c{j:03}"),
                "link_id": link,
                "body": format!("comment {j}"),
                "created_utc": 1_700_000_000 - j as i64 * 10
            })
        })
        .collect();
    (subs, coms)
}
