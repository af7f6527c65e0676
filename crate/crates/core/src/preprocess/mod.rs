//! Thread text to token sets.
//!
//! Stage order is fixed: normalize, tokenize, stopwords, bigrams, lemmatize,
//! acronyms, cleanup and, on the bag-of-words path only, the TF-IDF filter.

mod acronyms;
mod bigrams;
mod cleanup;
mod lemma;
mod normalize;
mod stopwords;
mod tfidf_filter;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Thread;

pub use acronyms::{default_acronyms, expand_acronyms};
pub use bigrams::{bigram_score, detect_bigrams, BigramStats};
pub use cleanup::final_cleanup;
pub use lemma::{lemmatize, DictionaryLemmatizer, LemmaEntry, Lemmatizer, Pos};
pub use normalize::normalize_text;
pub use stopwords::{remove_stopwords, StopwordSet, ENGLISH_STOPWORDS, PLATFORM_STOPWORDS};
pub use tfidf_filter::{max_tfidf_per_token, quantile, tfidf_filter};
pub use tokenize::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSet {
    pub thread_id: String,
    pub tokens: Vec<String>,
}

impl TokenSet {
    pub fn new(thread_id: impl Into<String>, tokens: Vec<String>) -> Self {
        Self {
            thread_id: thread_id.into(),
            tokens,
        }
    }

    /// Tokens joined by single spaces, the text form handed to embedders.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Which model family the token sets feed. The TF-IDF filter never runs on the
/// embedding path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelPath {
    BagOfWords,
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub min_token_len: usize,
    pub max_token_len: usize,
    pub bigram_min_count: usize,
    pub bigram_threshold: f64,
    pub allowed_pos: BTreeSet<Pos>,
    pub acronym_map: BTreeMap<String, String>,
    pub extra_stopwords: BTreeSet<String>,
    /// `None` disables the filter.
    pub tfidf_filter_quantile: Option<f64>,
    /// Optional `form<TAB>lemma<TAB>POS` lexicon layered over the built-in one.
    pub lemma_lexicon: Option<PathBuf>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            min_token_len: 2,
            max_token_len: 15,
            bigram_min_count: 5,
            bigram_threshold: 10.0,
            allowed_pos: [Pos::Noun, Pos::Adj, Pos::Verb, Pos::Adv].into_iter().collect(),
            acronym_map: default_acronyms(),
            extra_stopwords: BTreeSet::new(),
            tfidf_filter_quantile: None,
            lemma_lexicon: None,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_len > self.max_token_len {
            return Err(Error::Config(format!(
                "min_token_len {} exceeds max_token_len {}",
                self.min_token_len, self.max_token_len
            )));
        }
        if let Some(q) = self.tfidf_filter_quantile {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Config(format!("tfidf_filter_quantile {q} outside [0, 1]")));
            }
        }
        if self.acronym_map.keys().any(|k| k.chars().any(char::is_uppercase)) {
            return Err(Error::Config("acronym_map keys must be lowercase".into()));
        }
        Ok(())
    }
}

/// Token totals after each stage, for the run summary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub stages: Vec<(String, usize)>,
    pub tfidf_filter_skipped: bool,
}

impl StageCounts {
    fn record(&mut self, stage: &str, sets: &[TokenSet]) {
        let total = sets.iter().map(|s| s.tokens.len()).sum();
        self.stages.push((stage.to_string(), total));
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessOutput {
    pub token_sets: Vec<TokenSet>,
    pub counts: StageCounts,
}

/// Runs the full cleaning pipeline with one lemmatizer backend.
pub struct Preprocessor {
    config: PreprocessConfig,
    stopwords: StopwordSet,
    lemmatizer: Box<dyn Lemmatizer + Send + Sync>,
}

impl Preprocessor {
    pub fn new(config: PreprocessConfig) -> Result<Self> {
        config.validate()?;
        let lemmatizer = match &config.lemma_lexicon {
            Some(path) => DictionaryLemmatizer::builtin().with_lexicon_file(path)?,
            None => DictionaryLemmatizer::builtin(),
        };
        Ok(Self::with_lemmatizer(config, Box::new(lemmatizer)))
    }

    pub fn with_lemmatizer(config: PreprocessConfig, lemmatizer: Box<dyn Lemmatizer + Send + Sync>) -> Self {
        let stopwords = StopwordSet::new(&config.extra_stopwords);
        Self {
            config,
            stopwords,
            lemmatizer,
        }
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn run(&self, threads: &[Thread], path: ModelPath) -> Result<PreprocessOutput> {
        let cfg = &self.config;
        let mut counts = StageCounts::default();

        let mut sets: Vec<TokenSet> = threads
            .iter()
            .map(|t| {
                let text = normalize_text(&t.text);
                TokenSet::new(t.id.clone(), tokenize(&text, cfg.min_token_len, cfg.max_token_len))
            })
            .collect();
        counts.record("tokenize", &sets);

        for s in &mut sets {
            s.tokens = self.stopwords.filter(std::mem::take(&mut s.tokens));
        }
        counts.record("stopwords", &sets);

        if !sets.is_empty() {
            sets = detect_bigrams(&sets, cfg.bigram_min_count, cfg.bigram_threshold);
        }
        counts.record("bigrams", &sets);

        for s in &mut sets {
            s.tokens = lemmatize(&s.tokens, self.lemmatizer.as_ref(), &cfg.allowed_pos)?;
        }
        counts.record("lemmatize", &sets);

        for s in &mut sets {
            s.tokens = final_cleanup(expand_acronyms(&s.tokens, &cfg.acronym_map));
        }
        counts.record("cleanup", &sets);

        if let Some(q) = cfg.tfidf_filter_quantile {
            match path {
                ModelPath::BagOfWords => {
                    sets = tfidf_filter(&sets, q);
                    counts.record("tfidf_filter", &sets);
                }
                ModelPath::Embedding => {
                    log::warn!("tfidf filter configured but skipped on the embedding path");
                    counts.tfidf_filter_skipped = true;
                }
            }
        }

        Ok(PreprocessOutput {
            token_sets: sets,
            counts,
        })
    }
}

pub fn save_token_sets(path: impl AsRef<Path>, sets: &[TokenSet]) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(file, sets)?;
    Ok(())
}

pub fn load_token_sets(path: impl AsRef<Path>) -> Result<Vec<TokenSet>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}
