use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::models::result::normalize;
use crate::models::TopicModelResult;
use crate::preprocess::TokenSet;

pub const EPSILON: f64 = 1e-12;

/// `D_KL(P ‖ Q)` in nats after adding `EPSILON` to every entry and
/// renormalizing both inputs.
pub fn kl_between(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.is_empty() || p.len() != q.len() {
        return Err(Error::Validation(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    if p.iter().chain(q).any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Validation("distributions must be finite and non-negative".into()));
    }
    let smooth = |v: &[f64]| -> Vec<f64> {
        let total: f64 = v.iter().map(|x| x + EPSILON).sum();
        v.iter().map(|x| (x + EPSILON) / total).collect()
    };
    let (p, q) = (smooth(p), smooth(q));
    Ok(p.iter().zip(&q).map(|(pi, qi)| pi * (pi / qi).ln()).sum::<f64>().max(0.0))
}

/// Divergence of the corpus word distribution from the model's mean
/// topic-word distribution, over the model vocabulary.
pub fn kl_divergence(model: &TopicModelResult, corpus: &[TokenSet]) -> Result<f64> {
    if model.vocabulary.is_empty() {
        return Err(Error::Validation("empty vocabulary".into()));
    }
    if model.topic_word.is_empty() {
        return Err(Error::Degenerate("model has no topics".into()));
    }
    let index: HashMap<&str, usize> = model.vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut p = vec![0.0; model.vocabulary.len()];
    for t in corpus.iter().flat_map(|d| &d.tokens) {
        if let Some(&i) = index.get(t.as_str()) {
            p[i] += 1.0;
        }
    }
    if p.iter().all(|&x| x == 0.0) {
        return Err(Error::Validation("corpus shares no words with the model vocabulary".into()));
    }
    let mut q = vec![0.0; model.vocabulary.len()];
    for row in &model.topic_word {
        q.iter_mut().zip(row).for_each(|(a, b)| *a += b);
    }
    kl_between(&normalize(&p), &normalize(&q))
}

/// `exp(−mean log p(w))` where `dists[d]` is the predictive distribution for
/// document `d` and `docs[d]` its token ids (`None` = out of vocabulary).
pub fn perplexity_from_distributions(dists: &[Vec<f64>], docs: &[Vec<Option<usize>>]) -> Result<f64> {
    if dists.len() != docs.len() {
        return Err(Error::Validation("one distribution per document required".into()));
    }
    let mut log_sum = 0.0;
    let mut n = 0usize;
    for (dist, doc) in dists.iter().zip(docs) {
        for tok in doc {
            let p = tok.and_then(|i| dist.get(i).copied()).unwrap_or(0.0);
            log_sum += p.max(EPSILON).ln();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok((-log_sum / n as f64).exp())
}

/// Perplexity of held-out documents under the model's per-document mixture
/// `Σ_k θ_dk φ_k`. Documents unknown to the model use the mean membership.
pub fn perplexity(model: &TopicModelResult, held_out: &[TokenSet]) -> Result<f64> {
    let v = model.vocabulary.len();
    let index: HashMap<&str, usize> = model.vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let docs: Vec<Vec<Option<usize>>> = held_out
        .iter()
        .map(|d| d.tokens.iter().map(|t| index.get(t.as_str()).copied()).collect())
        .collect();

    let k = model.num_topics();
    if k == 0 || v == 0 {
        let uniform = if v == 0 { Vec::new() } else { vec![1.0 / v as f64; v] };
        return perplexity_from_distributions(&vec![uniform; docs.len()], &docs);
    }

    let phi = model.topic_word_distributions();
    let rows: Vec<Vec<f64>> = (0..model.num_docs())
        .map(|d| normalize(model.doc_topic.membership(d)))
        .filter(|r| r.len() == k)
        .collect();
    let mean_theta = if rows.is_empty() {
        vec![1.0 / k as f64; k]
    } else {
        let mut m = vec![0.0; k];
        for r in &rows {
            m.iter_mut().zip(r).for_each(|(a, b)| *a += b / rows.len() as f64);
        }
        m
    };
    let doc_index: HashMap<&str, usize> = model.doc_ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let mixture = |theta: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; v];
        for (w, row) in theta.iter().zip(&phi) {
            out.iter_mut().zip(row).for_each(|(o, p)| *o += w * p);
        }
        out
    };
    let mean_dist = mixture(&mean_theta);
    let dists: Vec<Vec<f64>> = held_out
        .iter()
        .map(|d| {
            doc_index
                .get(d.thread_id.as_str())
                .map(|&i| normalize(model.doc_topic.membership(i)))
                .filter(|r| r.len() == k)
                .map(|theta| mixture(&theta))
                .unwrap_or_else(|| mean_dist.clone())
        })
        .collect();
    perplexity_from_distributions(&dists, &docs)
}
