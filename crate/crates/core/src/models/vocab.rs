use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::preprocess::TokenSet;

/// Dense token↔id mapping with document frequencies. Ids follow first
/// appearance in the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr")]
pub struct Vocabulary {
    words: Vec<String>,
    doc_freq: Vec<usize>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn build(sets: &[TokenSet]) -> Result<Self> {
        let mut words = Vec::new();
        let mut doc_freq = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        // last document (1-based) each id was counted in
        let mut last_doc: Vec<usize> = Vec::new();
        for (d, set) in sets.iter().enumerate() {
            for t in &set.tokens {
                let id = *index.entry(t.clone()).or_insert_with(|| {
                    words.push(t.clone());
                    doc_freq.push(0);
                    last_doc.push(0);
                    words.len() - 1
                });
                if last_doc[id] != d + 1 {
                    last_doc[id] = d + 1;
                    doc_freq[id] += 1;
                }
            }
        }
        if words.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self {
            words,
            doc_freq,
            index,
        })
    }

    pub fn from_words(words: Vec<String>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let doc_freq = vec![1; words.len()];
        Self {
            words,
            doc_freq,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn doc_freq(&self, id: usize) -> usize {
        self.doc_freq[id]
    }

}

#[derive(Deserialize)]
struct VocabularyRepr {
    words: Vec<String>,
    doc_freq: Vec<usize>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r.words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self {
            words: r.words,
            doc_freq: r.doc_freq,
            index,
        }
    }
}

/// Bag-of-words documents as sorted `(token_id, count)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowCorpus {
    pub doc_ids: Vec<String>,
    pub docs: Vec<Vec<(usize, usize)>>,
}

impl BowCorpus {
    pub fn from_token_sets(sets: &[TokenSet], vocab: &Vocabulary) -> Self {
        let docs = sets
            .iter()
            .map(|s| {
                let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
                for t in &s.tokens {
                    if let Some(id) = vocab.id(t) {
                        *counts.entry(id).or_default() += 1;
                    }
                }
                counts.into_iter().collect()
            })
            .collect();
        Self {
            doc_ids: sets.iter().map(|s| s.thread_id.clone()).collect(),
            docs,
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().flatten().map(|&(_, c)| c).sum()
    }

    /// Smooth-idf TF-IDF with L2-normalized rows (documents × vocabulary).
    pub fn tfidf(&self, vocab_size: usize) -> CsrMatrix {
        let n = self.docs.len() as f64;
        let mut df = vec![0usize; vocab_size];
        for doc in &self.docs {
            for &(id, _) in doc {
                df[id] += 1;
            }
        }
        let idf: Vec<f64> = df.iter().map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect();
        let rows = self
            .docs
            .iter()
            .map(|doc| {
                let mut row: Vec<(usize, f64)> = doc.iter().map(|&(id, c)| (id, c as f64 * idf[id])).collect();
                let norm = row.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter_mut().for_each(|(_, x)| *x /= norm);
                }
                row
            })
            .collect();
        CsrMatrix::from_rows(vocab_size, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(docs: &[&[&str]]) -> Vec<TokenSet> {
        docs.iter()
            .enumerate()
            .map(|(i, d)| TokenSet::new(i.to_string(), d.iter().map(|s| s.to_string()).collect()))
            .collect()
    }

    #[test]
    fn ids_and_document_frequency() {
        let v = Vocabulary::build(&sets(&[&["a", "b"], &["b", "c"]])).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.doc_freq(v.id("b").unwrap()), 2);

        let v = Vocabulary::build(&sets(&[&["a", "a"]])).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.doc_freq(0), 1);
    }

    #[test]
    fn df_matches_recount() {
        let docs = sets(&[&["x", "y", "x", "z"], &["y", "y"], &["z", "w", "x"]]);
        let v = Vocabulary::build(&docs).unwrap();
        for w in ["x", "y", "z", "w"] {
            let brute = docs.iter().filter(|d| d.tokens.iter().any(|t| t == w)).count();
            assert_eq!(v.doc_freq(v.id(w).unwrap()), brute, "{w}");
        }
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(Vocabulary::build(&sets(&[&[], &[]])), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn bow_counts() {
        let docs = sets(&[&["a", "b", "a"]]);
        let v = Vocabulary::build(&docs).unwrap();
        let bow = BowCorpus::from_token_sets(&docs, &v);
        assert_eq!(bow.docs[0], vec![(0, 2), (1, 1)]);
        assert_eq!(bow.total_tokens(), 3);
        let tfidf = bow.tfidf(v.len());
        assert!((tfidf.frobenius_sq() - 1.0).abs() < 1e-12);
    }
}
