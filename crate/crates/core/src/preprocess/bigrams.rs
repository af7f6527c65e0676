use std::collections::HashMap;

use super::TokenSet;

/// `(count(ab) - min_count) * V / (count(a) * count(b))`.
pub fn bigram_score(count_ab: usize, count_a: usize, count_b: usize, vocab_size: usize, min_count: usize) -> f64 {
    if count_a == 0 || count_b == 0 {
        return f64::NEG_INFINITY;
    }
    (count_ab as f64 - min_count as f64) * vocab_size as f64 / (count_a as f64 * count_b as f64)
}

/// Unigram and adjacent-pair counts over a corpus.
#[derive(Debug, Default)]
pub struct BigramStats<'a> {
    unigrams: HashMap<&'a str, usize>,
    pairs: HashMap<(&'a str, &'a str), usize>,
}

impl<'a> BigramStats<'a> {
    pub fn from_corpus(sets: &'a [TokenSet]) -> Self {
        let mut stats = Self::default();
        for set in sets {
            for t in &set.tokens {
                *stats.unigrams.entry(t.as_str()).or_default() += 1;
            }
            for w in set.tokens.windows(2) {
                *stats.pairs.entry((w[0].as_str(), w[1].as_str())).or_default() += 1;
            }
        }
        stats
    }

    pub fn vocab_size(&self) -> usize {
        self.unigrams.len()
    }

    pub fn score(&self, a: &str, b: &str, min_count: usize) -> f64 {
        let count_ab = self.pairs.get(&(a, b)).copied().unwrap_or(0);
        let count_a = self.unigrams.get(a).copied().unwrap_or(0);
        let count_b = self.unigrams.get(b).copied().unwrap_or(0);
        bigram_score(count_ab, count_a, count_b, self.vocab_size(), min_count)
    }
}

/// Joins adjacent pairs scoring at or above `threshold` into `a_b`, scanning
/// left to right so each token joins at most one pair.
pub fn detect_bigrams(sets: &[TokenSet], min_count: usize, threshold: f64) -> Vec<TokenSet> {
    let stats = BigramStats::from_corpus(sets);
    sets.iter()
        .map(|set| {
            let toks = &set.tokens;
            let mut out = Vec::with_capacity(toks.len());
            let mut i = 0;
            while i < toks.len() {
                if i + 1 < toks.len() && stats.score(&toks[i], &toks[i + 1], min_count) >= threshold {
                    out.push(format!("{}_{}", toks[i], toks[i + 1]));
                    i += 2;
                } else {
                    out.push(toks[i].clone());
                    i += 1;
                }
            }
            TokenSet::new(set.thread_id.clone(), out)
        })
        .collect()
}
