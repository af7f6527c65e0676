use std::collections::{BTreeMap, HashMap, HashSet};

use super::TokenSet;

/// Largest TF-IDF weight each token reaches in any document, with
/// `tf = count / doc_len` and `idf = ln((1 + N) / (1 + df)) + 1`.
pub fn max_tfidf_per_token(sets: &[TokenSet]) -> BTreeMap<String, f64> {
    let n_docs = sets.len() as f64;
    let mut df: HashMap<&str, usize> = HashMap::new();
    for set in sets {
        let unique: HashSet<&str> = set.tokens.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    for set in sets {
        if set.tokens.is_empty() {
            continue;
        }
        let len = set.tokens.len() as f64;
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for t in &set.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
        for (t, c) in counts {
            let idf = ((1.0 + n_docs) / (1.0 + df[t] as f64)).ln() + 1.0;
            let w = c as f64 / len * idf;
            let slot = best.entry(t.to_string()).or_insert(0.0);
            if w > *slot {
                *slot = w;
            }
        }
    }
    best
}

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Removes, corpus-wide, every token whose maximum TF-IDF weight falls below
/// the `q`-quantile of all per-token maxima.
pub fn tfidf_filter(sets: &[TokenSet], q: f64) -> Vec<TokenSet> {
    let maxima = max_tfidf_per_token(sets);
    let values: Vec<f64> = maxima.values().copied().collect();
    let Some(cut) = quantile(&values, q) else {
        return sets.to_vec();
    };
    sets.iter()
        .map(|s| {
            let kept = s.tokens.iter().filter(|t| maxima[t.as_str()] >= cut).cloned().collect();
            TokenSet::new(s.thread_id.clone(), kept)
        })
        .collect()
}
